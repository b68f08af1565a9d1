#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nltrack/core/tensor.hpp"

namespace nltrack::kernels {

// Global worker-thread bound. 1 (the default) runs every kernel on its serial
// path. The OpenMP paths partition work by output element with serial
// accumulation inside each element, so results are bit-identical to the
// serial reference at any thread count.
void set_threads(int n);
int threads();
bool parallel_enabled(std::size_t work);

// ---------------------------------------------------------------------------
// matmul: C[m,n] = A[m,k] * B[k,n]  (acc: C += ...)
// ---------------------------------------------------------------------------
void matmul_serial(const double* a, const double* b, double* c, int m, int k, int n, bool acc);
void matmul_omp(const double* a, const double* b, double* c, int m, int k, int n, bool acc);
void matmul(const double* a, const double* b, double* c, int m, int k, int n, bool acc);

void transpose(const double* src, int r, int c, double* dst);

// Tensor-level matmul with logical transposes (materialized into thread-local
// scratch before the row-major core).
Tensor matmul(const Tensor& a, bool ta, const Tensor& b, bool tb);
void matmul_acc(const Tensor& a, bool ta, const Tensor& b, bool tb, Tensor& c);

// ---------------------------------------------------------------------------
// Row-wise softmax with an optional key mask (length n, 1 = ignore).
// Masked columns produce exactly 0. A fully-masked row produces all zeros.
// ---------------------------------------------------------------------------
void softmax_rows_serial(const double* x, int m, int n, const std::uint8_t* key_mask, double* y);
void softmax_rows_omp(const double* x, int m, int n, const std::uint8_t* key_mask, double* y);
void softmax_rows(const double* x, int m, int n, const std::uint8_t* key_mask, double* y);
// dx += softmax backward; masked columns receive no gradient.
void softmax_rows_backward(const double* y, const double* dy, int m, int n,
                           const std::uint8_t* key_mask, double* dx_acc);

// ---------------------------------------------------------------------------
// Row-wise layer norm: y = (x - mean) * inv_std * gamma + beta.
// mean/inv_std are saved per row for the backward pass.
// ---------------------------------------------------------------------------
void layer_norm_serial(const double* x, int m, int n, const double* gamma, const double* beta,
                       double eps, double* y, double* save_mean, double* save_inv_std);
void layer_norm_omp(const double* x, int m, int n, const double* gamma, const double* beta,
                    double eps, double* y, double* save_mean, double* save_inv_std);
void layer_norm(const double* x, int m, int n, const double* gamma, const double* beta,
                double eps, double* y, double* save_mean, double* save_inv_std);
void layer_norm_backward(const double* x, const double* dy, int m, int n, const double* gamma,
                         const double* save_mean, const double* save_inv_std, double* dx_acc,
                         double* dgamma_acc, double* dbeta_acc);

// ---------------------------------------------------------------------------
// 3x3 same-padding convolution support on [h*w, c] feature maps (row-major
// spatial raster). Column order in the unrolled matrix: tap-major, channel-
// minor: col = ((dy+1)*3 + (dx+1)) * c + ch.
// ---------------------------------------------------------------------------
void im2col3_serial(const double* x, int h, int w, int c, double* cols);
void im2col3_omp(const double* x, int h, int w, int c, double* cols);
void im2col3(const double* x, int h, int w, int c, double* cols);
// Gather-form adjoint: dx[p,ch] += sum over taps of dcols at the source position.
void col2im3_acc_serial(const double* dcols, int h, int w, int c, double* dx);
void col2im3_acc_omp(const double* dcols, int h, int w, int c, double* dx);
void col2im3_acc(const double* dcols, int h, int w, int c, double* dx);

// ---------------------------------------------------------------------------
// RoI bilinear sampling: r*r bins over box (x1,y1,x2,y2) in normalized [0,1]
// coordinates of an [h*w, c] feature map; one cell-center sample per bin,
// sample coordinates clamped to the valid cell-center range.
// ---------------------------------------------------------------------------
void roi_bilinear(const double* feat, int h, int w, int c, const std::array<double, 4>& box,
                  int r, double* out);
void roi_bilinear_backward(const double* dout, int h, int w, int c,
                           const std::array<double, 4>& box, int r, double* dfeat_acc);

}  // namespace nltrack::kernels
