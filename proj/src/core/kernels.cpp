#include "nltrack/core/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>

#include "nltrack/common.hpp"

namespace nltrack::kernels {

namespace {

std::atomic<int> g_threads{1};

// Scratch for materialized transposes. thread_local keeps the parallel paths
// reentrant (each OpenMP worker sees its own buffer).
thread_local std::vector<double> tl_scratch_a;
thread_local std::vector<double> tl_scratch_b;

constexpr std::size_t kParallelWorkFloor = 1 << 15;

}  // namespace

void set_threads(int n) {
    if (n < 1) fail(ErrorCode::config_invalid, "thread count must be >= 1");
    g_threads.store(n, std::memory_order_relaxed);
}

int threads() { return g_threads.load(std::memory_order_relaxed); }

bool parallel_enabled(std::size_t work) {
    return threads() > 1 && work >= kParallelWorkFloor && !omp_in_parallel();
}

// ---------------------------------------------------------------------------
// matmul
// ---------------------------------------------------------------------------

namespace {

// ikj loop order: the inner loop streams both c's row and b's row, which the
// compiler vectorizes. Accumulation into c[i,:] happens in a fixed k order,
// so the result does not depend on how rows are assigned to threads.
inline void matmul_row(const double* a_row, const double* b, double* c_row, int k, int n,
                       bool acc) {
    if (!acc) std::memset(c_row, 0, sizeof(double) * static_cast<std::size_t>(n));
    for (int kk = 0; kk < k; ++kk) {
        const double aik = a_row[kk];
        const double* b_row = b + static_cast<std::size_t>(kk) * n;
        for (int j = 0; j < n; ++j) c_row[j] += aik * b_row[j];
    }
}

}  // namespace

void matmul_serial(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
    for (int i = 0; i < m; ++i)
        matmul_row(a + static_cast<std::size_t>(i) * k, b, c + static_cast<std::size_t>(i) * n, k,
                   n, acc);
}

void matmul_omp(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
#pragma omp parallel for schedule(static) num_threads(threads())
    for (int i = 0; i < m; ++i)
        matmul_row(a + static_cast<std::size_t>(i) * k, b, c + static_cast<std::size_t>(i) * n, k,
                   n, acc);
}

void matmul(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
    const std::size_t work =
        static_cast<std::size_t>(m) * static_cast<std::size_t>(k) * static_cast<std::size_t>(n);
    if (parallel_enabled(work))
        matmul_omp(a, b, c, m, k, n, acc);
    else
        matmul_serial(a, b, c, m, k, n, acc);
}

void transpose(const double* src, int r, int c, double* dst) {
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
            dst[static_cast<std::size_t>(j) * r + i] = src[static_cast<std::size_t>(i) * c + j];
}

namespace {

// Resolves logical transposes into contiguous row-major operands.
struct Operand {
    const double* p;
    int rows, cols;
};

Operand resolve(const Tensor& t, bool transposed, std::vector<double>& scratch) {
    if (!transposed) return {t.d.data(), t.rows, t.cols};
    scratch.resize(t.d.size());
    transpose(t.d.data(), t.rows, t.cols, scratch.data());
    return {scratch.data(), t.cols, t.rows};
}

}  // namespace

Tensor matmul(const Tensor& a, bool ta, const Tensor& b, bool tb) {
    const Operand A = resolve(a, ta, tl_scratch_a);
    const Operand B = resolve(b, tb, tl_scratch_b);
    if (A.cols != B.rows) fail(ErrorCode::shape_error, "matmul inner dimensions disagree");
    Tensor c = Tensor::zeros(A.rows, B.cols);
    matmul(A.p, B.p, c.d.data(), A.rows, A.cols, B.cols, false);
    return c;
}

void matmul_acc(const Tensor& a, bool ta, const Tensor& b, bool tb, Tensor& c) {
    const Operand A = resolve(a, ta, tl_scratch_a);
    const Operand B = resolve(b, tb, tl_scratch_b);
    if (A.cols != B.rows) fail(ErrorCode::shape_error, "matmul inner dimensions disagree");
    if (c.rows != A.rows || c.cols != B.cols)
        fail(ErrorCode::shape_error, "matmul accumulator shape disagrees");
    matmul(A.p, B.p, c.d.data(), A.rows, A.cols, B.cols, true);
}

// ---------------------------------------------------------------------------
// softmax
// ---------------------------------------------------------------------------

namespace {

inline void softmax_row(const double* x, int n, const std::uint8_t* key_mask, double* y) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
        if (!key_mask || !key_mask[j]) mx = std::max(mx, x[j]);
    if (!std::isfinite(mx)) {
        // Every key masked: emit an all-zero row rather than NaN.
        std::memset(y, 0, sizeof(double) * static_cast<std::size_t>(n));
        return;
    }
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
        const double e = (key_mask && key_mask[j]) ? 0.0 : std::exp(x[j] - mx);
        y[j] = e;
        sum += e;
    }
    const double inv = 1.0 / sum;
    for (int j = 0; j < n; ++j) y[j] *= inv;
}

}  // namespace

void softmax_rows_serial(const double* x, int m, int n, const std::uint8_t* key_mask, double* y) {
    for (int i = 0; i < m; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * n;
        softmax_row(x + off, n, key_mask, y + off);
    }
}

void softmax_rows_omp(const double* x, int m, int n, const std::uint8_t* key_mask, double* y) {
#pragma omp parallel for schedule(static) num_threads(threads())
    for (int i = 0; i < m; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * n;
        softmax_row(x + off, n, key_mask, y + off);
    }
}

void softmax_rows(const double* x, int m, int n, const std::uint8_t* key_mask, double* y) {
    const std::size_t work = static_cast<std::size_t>(m) * static_cast<std::size_t>(n) * 8;
    if (parallel_enabled(work))
        softmax_rows_omp(x, m, n, key_mask, y);
    else
        softmax_rows_serial(x, m, n, key_mask, y);
}

void softmax_rows_backward(const double* y, const double* dy, int m, int n,
                           const std::uint8_t* key_mask, double* dx_acc) {
    (void)key_mask;  // masked columns have y == 0, so they contribute and receive nothing
    for (int i = 0; i < m; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * n;
        double dot = 0.0;
        for (int j = 0; j < n; ++j) dot += dy[off + j] * y[off + j];
        for (int j = 0; j < n; ++j) dx_acc[off + j] += y[off + j] * (dy[off + j] - dot);
    }
}

// ---------------------------------------------------------------------------
// layer norm
// ---------------------------------------------------------------------------

namespace {

inline void layer_norm_row(const double* x, int n, const double* gamma, const double* beta,
                           double eps, double* y, double* save_mean, double* save_inv_std) {
    double mean = 0.0;
    for (int j = 0; j < n; ++j) mean += x[j];
    mean /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) {
        const double dxj = x[j] - mean;
        var += dxj * dxj;
    }
    var /= n;
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < n; ++j) y[j] = (x[j] - mean) * inv * gamma[j] + beta[j];
    *save_mean = mean;
    *save_inv_std = inv;
}

}  // namespace

void layer_norm_serial(const double* x, int m, int n, const double* gamma, const double* beta,
                       double eps, double* y, double* save_mean, double* save_inv_std) {
    for (int i = 0; i < m; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * n;
        layer_norm_row(x + off, n, gamma, beta, eps, y + off, save_mean + i, save_inv_std + i);
    }
}

void layer_norm_omp(const double* x, int m, int n, const double* gamma, const double* beta,
                    double eps, double* y, double* save_mean, double* save_inv_std) {
#pragma omp parallel for schedule(static) num_threads(threads())
    for (int i = 0; i < m; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * n;
        layer_norm_row(x + off, n, gamma, beta, eps, y + off, save_mean + i, save_inv_std + i);
    }
}

void layer_norm(const double* x, int m, int n, const double* gamma, const double* beta, double eps,
                double* y, double* save_mean, double* save_inv_std) {
    const std::size_t work = static_cast<std::size_t>(m) * static_cast<std::size_t>(n) * 6;
    if (parallel_enabled(work))
        layer_norm_omp(x, m, n, gamma, beta, eps, y, save_mean, save_inv_std);
    else
        layer_norm_serial(x, m, n, gamma, beta, eps, y, save_mean, save_inv_std);
}

void layer_norm_backward(const double* x, const double* dy, int m, int n, const double* gamma,
                         const double* save_mean, const double* save_inv_std, double* dx_acc,
                         double* dgamma_acc, double* dbeta_acc) {
    // dgamma/dbeta reduce across rows; keep that loop serial so accumulation
    // order is fixed. The per-row dx part carries no cross-row coupling.
    for (int i = 0; i < m; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * n;
        const double inv = save_inv_std[i];
        const double mean = save_mean[i];
        for (int j = 0; j < n; ++j) {
            const double xhat = (x[off + j] - mean) * inv;
            dgamma_acc[j] += dy[off + j] * xhat;
            dbeta_acc[j] += dy[off + j];
        }
    }
    for (int i = 0; i < m; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * n;
        const double inv = save_inv_std[i];
        const double mean = save_mean[i];
        double g_mean = 0.0, gx_mean = 0.0;
        for (int j = 0; j < n; ++j) {
            const double g = dy[off + j] * gamma[j];
            const double xhat = (x[off + j] - mean) * inv;
            g_mean += g;
            gx_mean += g * xhat;
        }
        g_mean /= n;
        gx_mean /= n;
        for (int j = 0; j < n; ++j) {
            const double g = dy[off + j] * gamma[j];
            const double xhat = (x[off + j] - mean) * inv;
            dx_acc[off + j] += inv * (g - g_mean - xhat * gx_mean);
        }
    }
}

// ---------------------------------------------------------------------------
// 3x3 im2col / col2im
// ---------------------------------------------------------------------------

namespace {

inline void im2col3_position(const double* x, int h, int w, int c, int y, int xx, double* out) {
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            double* slot = out + static_cast<std::size_t>(((dy + 1) * 3 + (dx + 1))) * c;
            const int sy = y + dy, sx = xx + dx;
            if (sy < 0 || sy >= h || sx < 0 || sx >= w) {
                std::memset(slot, 0, sizeof(double) * static_cast<std::size_t>(c));
            } else {
                const double* src = x + (static_cast<std::size_t>(sy) * w + sx) * c;
                std::memcpy(slot, src, sizeof(double) * static_cast<std::size_t>(c));
            }
        }
    }
}

}  // namespace

void im2col3_serial(const double* x, int h, int w, int c, double* cols) {
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx)
            im2col3_position(x, h, w, c, y, xx,
                             cols + (static_cast<std::size_t>(y) * w + xx) * 9 * c);
}

void im2col3_omp(const double* x, int h, int w, int c, double* cols) {
#pragma omp parallel for schedule(static) num_threads(threads())
    for (int p = 0; p < h * w; ++p)
        im2col3_position(x, h, w, c, p / w, p % w, cols + static_cast<std::size_t>(p) * 9 * c);
}

void im2col3(const double* x, int h, int w, int c, double* cols) {
    const std::size_t work = static_cast<std::size_t>(h) * w * 9 * c;
    if (parallel_enabled(work))
        im2col3_omp(x, h, w, c, cols);
    else
        im2col3_serial(x, h, w, c, cols);
}

namespace {

// Gather form: the adjoint of "position p reads neighbor p+(dy,dx)" is
// "position p accumulates from reader p-(dy,dx)", tap order fixed, so one
// thread owns each output element.
inline void col2im3_position(const double* dcols, int h, int w, int c, int y, int xx, double* dxp) {
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            const int ry = y - dy, rx = xx - dx;
            if (ry < 0 || ry >= h || rx < 0 || rx >= w) continue;
            const std::size_t reader = static_cast<std::size_t>(ry) * w + rx;
            const double* src =
                dcols + (reader * 9 + static_cast<std::size_t>((dy + 1) * 3 + (dx + 1))) * c;
            for (int ch = 0; ch < c; ++ch) dxp[ch] += src[ch];
        }
    }
}

}  // namespace

void col2im3_acc_serial(const double* dcols, int h, int w, int c, double* dx) {
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx)
            col2im3_position(dcols, h, w, c, y, xx,
                             dx + (static_cast<std::size_t>(y) * w + xx) * c);
}

void col2im3_acc_omp(const double* dcols, int h, int w, int c, double* dx) {
#pragma omp parallel for schedule(static) num_threads(threads())
    for (int p = 0; p < h * w; ++p)
        col2im3_position(dcols, h, w, c, p / w, p % w, dx + static_cast<std::size_t>(p) * c);
}

void col2im3_acc(const double* dcols, int h, int w, int c, double* dx) {
    const std::size_t work = static_cast<std::size_t>(h) * w * 9 * c;
    if (parallel_enabled(work))
        col2im3_acc_omp(dcols, h, w, c, dx);
    else
        col2im3_acc_serial(dcols, h, w, c, dx);
}

// ---------------------------------------------------------------------------
// RoI bilinear sampling
// ---------------------------------------------------------------------------

namespace {

struct Sample {
    int x0, x1, y0, y1;
    double w00, w01, w10, w11;
};

// Cell-center convention: normalized coordinate t maps to continuous cell
// index t*extent - 0.5. A box edge aligned with a cell boundary therefore
// lands bin centers exactly on cell centers (integer indices, weight 1).
Sample roi_sample(const std::array<double, 4>& box, int h, int w, int r, int iy, int ix) {
    const double bw = (box[2] - box[0]) / r;
    const double bh = (box[3] - box[1]) / r;
    double u = (box[0] + (ix + 0.5) * bw) * w - 0.5;
    double v = (box[1] + (iy + 0.5) * bh) * h - 0.5;
    u = std::clamp(u, 0.0, static_cast<double>(w - 1));
    v = std::clamp(v, 0.0, static_cast<double>(h - 1));
    Sample s;
    s.x0 = static_cast<int>(std::floor(u));
    s.y0 = static_cast<int>(std::floor(v));
    s.x1 = std::min(s.x0 + 1, w - 1);
    s.y1 = std::min(s.y0 + 1, h - 1);
    const double fx = u - s.x0;
    const double fy = v - s.y0;
    s.w00 = (1.0 - fy) * (1.0 - fx);
    s.w01 = (1.0 - fy) * fx;
    s.w10 = fy * (1.0 - fx);
    s.w11 = fy * fx;
    return s;
}

}  // namespace

void roi_bilinear(const double* feat, int h, int w, int c, const std::array<double, 4>& box,
                  int r, double* out) {
    for (int iy = 0; iy < r; ++iy) {
        for (int ix = 0; ix < r; ++ix) {
            const Sample s = roi_sample(box, h, w, r, iy, ix);
            const double* f00 = feat + (static_cast<std::size_t>(s.y0) * w + s.x0) * c;
            const double* f01 = feat + (static_cast<std::size_t>(s.y0) * w + s.x1) * c;
            const double* f10 = feat + (static_cast<std::size_t>(s.y1) * w + s.x0) * c;
            const double* f11 = feat + (static_cast<std::size_t>(s.y1) * w + s.x1) * c;
            double* o = out + (static_cast<std::size_t>(iy) * r + ix) * c;
            for (int ch = 0; ch < c; ++ch)
                o[ch] = s.w00 * f00[ch] + s.w01 * f01[ch] + s.w10 * f10[ch] + s.w11 * f11[ch];
        }
    }
}

void roi_bilinear_backward(const double* dout, int h, int w, int c,
                           const std::array<double, 4>& box, int r, double* dfeat_acc) {
    for (int iy = 0; iy < r; ++iy) {
        for (int ix = 0; ix < r; ++ix) {
            const Sample s = roi_sample(box, h, w, r, iy, ix);
            const double* o = dout + (static_cast<std::size_t>(iy) * r + ix) * c;
            double* f00 = dfeat_acc + (static_cast<std::size_t>(s.y0) * w + s.x0) * c;
            double* f01 = dfeat_acc + (static_cast<std::size_t>(s.y0) * w + s.x1) * c;
            double* f10 = dfeat_acc + (static_cast<std::size_t>(s.y1) * w + s.x0) * c;
            double* f11 = dfeat_acc + (static_cast<std::size_t>(s.y1) * w + s.x1) * c;
            for (int ch = 0; ch < c; ++ch) {
                f00[ch] += s.w00 * o[ch];
                f01[ch] += s.w01 * o[ch];
                f10[ch] += s.w10 * o[ch];
                f11[ch] += s.w11 * o[ch];
            }
        }
    }
}

}  // namespace nltrack::kernels
