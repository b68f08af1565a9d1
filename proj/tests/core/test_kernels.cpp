#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "nltrack/core/kernels.hpp"
#include "nltrack/core/rng.hpp"
#include "nltrack/core/tensor.hpp"

using namespace nltrack;

namespace {

Tensor random_tensor(int r, int c, Rng& rng) {
    Tensor t(r, c);
    for (double& x : t.d) x = rng.normal();
    return t;
}

// Independent triple-loop oracle in ijk order (the library core runs ikj).
Tensor matmul_naive(const Tensor& a, bool ta, const Tensor& b, bool tb) {
    const int m = ta ? a.cols : a.rows;
    const int k = ta ? a.rows : a.cols;
    const int kb = tb ? b.cols : b.rows;
    const int n = tb ? b.rows : b.cols;
    REQUIRE(k == kb);
    Tensor c(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int kk = 0; kk < k; ++kk) {
                const double av = ta ? a.at(kk, i) : a.at(i, kk);
                const double bv = tb ? b.at(j, kk) : b.at(kk, j);
                s += av * bv;
            }
            c.at(i, j) = s;
        }
    return c;
}

struct ThreadGuard {
    ~ThreadGuard() { kernels::set_threads(1); }
};

}  // namespace

TEST_CASE("matmul matches the naive oracle in all transpose modes") {
    Rng rng(11);
    const std::array<std::array<int, 3>, 4> shapes{{{3, 4, 5}, {1, 7, 2}, {16, 16, 16}, {9, 1, 6}}};
    for (const auto& s : shapes) {
        for (const bool ta : {false, true}) {
            for (const bool tb : {false, true}) {
                Tensor a = ta ? random_tensor(s[1], s[0], rng) : random_tensor(s[0], s[1], rng);
                Tensor b = tb ? random_tensor(s[2], s[1], rng) : random_tensor(s[1], s[2], rng);
                Tensor got = kernels::matmul(a, ta, b, tb);
                Tensor want = matmul_naive(a, ta, b, tb);
                CHECK(max_abs_diff(got, want) < 1e-12);
            }
        }
    }
}

TEST_CASE("matmul accumulate adds onto the existing output") {
    Rng rng(12);
    Tensor a = random_tensor(5, 3, rng), b = random_tensor(3, 4, rng);
    Tensor c = random_tensor(5, 4, rng);
    Tensor base = c;
    kernels::matmul_acc(a, false, b, false, c);
    Tensor prod = matmul_naive(a, false, b, false);
    for (std::size_t i = 0; i < c.d.size(); ++i)
        CHECK(c.d[i] == doctest::Approx(base.d[i] + prod.d[i]).epsilon(1e-12));
}

TEST_CASE("parallel matmul is bit-identical to the serial reference") {
    ThreadGuard guard;
    Rng rng(13);
    for (const int threads : {2, 3, 8}) {
        Tensor a = random_tensor(37, 29, rng), b = random_tensor(29, 41, rng);
        Tensor cs(37, 41), cp(37, 41);
        kernels::matmul_serial(a.d.data(), b.d.data(), cs.d.data(), 37, 29, 41, false);
        kernels::set_threads(threads);
        kernels::matmul_omp(a.d.data(), b.d.data(), cp.d.data(), 37, 29, 41, false);
        CHECK(bit_equal(cs, cp));
    }
}

TEST_CASE("softmax rows: normalization, masking, and parallel equality") {
    ThreadGuard guard;
    Rng rng(14);
    const int m = 23, n = 17;
    Tensor x = random_tensor(m, n, rng);
    std::vector<std::uint8_t> mask(n, 0);
    mask[0] = mask[5] = mask[16] = 1;

    Tensor y(m, n);
    kernels::softmax_rows_serial(x.d.data(), m, n, mask.data(), y.d.data());
    for (int i = 0; i < m; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            if (mask[static_cast<std::size_t>(j)]) CHECK(y.at(i, j) == 0.0);
            CHECK(y.at(i, j) >= 0.0);
            sum += y.at(i, j);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }

    // Larger logits win within a row.
    Tensor x2(1, 3);
    x2.d = {1.0, 3.0, 2.0};
    Tensor y2(1, 3);
    kernels::softmax_rows_serial(x2.d.data(), 1, 3, nullptr, y2.d.data());
    CHECK(y2.d[1] > y2.d[2]);
    CHECK(y2.d[2] > y2.d[0]);
    const double z = std::exp(1.0) + std::exp(3.0) + std::exp(2.0);
    CHECK(y2.d[1] == doctest::Approx(std::exp(3.0) / z).epsilon(1e-12));

    Tensor yp(m, n);
    kernels::set_threads(4);
    kernels::softmax_rows_omp(x.d.data(), m, n, mask.data(), yp.d.data());
    CHECK(bit_equal(y, yp));
}

TEST_CASE("softmax with every key masked yields an all-zero row, not NaN") {
    Tensor x(2, 4);
    x.d = {1.0, 2.0, 3.0, 4.0, -1.0, -2.0, -3.0, -4.0};
    std::vector<std::uint8_t> mask(4, 1);
    Tensor y(2, 4);
    kernels::softmax_rows_serial(x.d.data(), 2, 4, mask.data(), y.d.data());
    for (double v : y.d) CHECK(v == 0.0);
}

TEST_CASE("layer norm normalizes rows and matches the parallel path bitwise") {
    ThreadGuard guard;
    Rng rng(15);
    const int m = 19, n = 31;
    Tensor x = random_tensor(m, n, rng);
    for (double& v : x.d) v = v * 3.0 + 2.0;
    Tensor gamma = Tensor::full(1, n, 1.0), beta = Tensor::zeros(1, n);
    Tensor y(m, n);
    std::vector<double> mu(m), inv(m);
    kernels::layer_norm_serial(x.d.data(), m, n, gamma.d.data(), beta.d.data(), 1e-5, y.d.data(),
                               mu.data(), inv.data());
    for (int i = 0; i < m; ++i) {
        double mean = 0.0, var = 0.0;
        for (int j = 0; j < n; ++j) mean += y.at(i, j);
        mean /= n;
        for (int j = 0; j < n; ++j) var += (y.at(i, j) - mean) * (y.at(i, j) - mean);
        var /= n;
        CHECK(std::fabs(mean) < 1e-10);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
    }

    Tensor yp(m, n);
    std::vector<double> mup(m), invp(m);
    kernels::set_threads(3);
    kernels::layer_norm_omp(x.d.data(), m, n, gamma.d.data(), beta.d.data(), 1e-5, yp.d.data(),
                            mup.data(), invp.data());
    CHECK(bit_equal(y, yp));
}

TEST_CASE("im2col3 gathers the 3x3 neighborhood with zero padding") {
    // 2x3 raster, 1 channel, values 1..6 laid out row-major.
    const int h = 2, w = 3, c = 1;
    Tensor x(h * w, c);
    x.d = {1, 2, 3, 4, 5, 6};
    Tensor cols(h * w, 9 * c);
    kernels::im2col3_serial(x.d.data(), h, w, c, cols.d.data());
    // Position (0,0): only (dy,dx) in {0,1}x{0,1} are inside.
    const std::vector<double> want00 = {0, 0, 0, 0, 1, 2, 0, 4, 5};
    for (int t = 0; t < 9; ++t) CHECK(cols.at(0, t) == want00[static_cast<std::size_t>(t)]);
    // Position (1,1) = value 5: full neighborhood minus the out-of-bounds bottom row.
    const std::vector<double> want11 = {1, 2, 3, 4, 5, 6, 0, 0, 0};
    for (int t = 0; t < 9; ++t) CHECK(cols.at(4, t) == want11[static_cast<std::size_t>(t)]);
}

TEST_CASE("col2im3 is the adjoint of im2col3") {
    ThreadGuard guard;
    Rng rng(16);
    const int h = 5, w = 7, c = 3;
    Tensor x = random_tensor(h * w, c, rng);
    Tensor y = random_tensor(h * w, 9 * c, rng);
    Tensor cols(h * w, 9 * c);
    kernels::im2col3_serial(x.d.data(), h, w, c, cols.d.data());
    Tensor xt = Tensor::zeros(h * w, c);
    kernels::col2im3_acc_serial(y.d.data(), h, w, c, xt.d.data());
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < cols.d.size(); ++i) lhs += cols.d[i] * y.d[i];
    for (std::size_t i = 0; i < x.d.size(); ++i) rhs += x.d[i] * xt.d[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));

    Tensor xt_p = Tensor::zeros(h * w, c);
    kernels::set_threads(4);
    kernels::col2im3_acc_omp(y.d.data(), h, w, c, xt_p.d.data());
    CHECK(bit_equal(xt, xt_p));
    Tensor cols_p(h * w, 9 * c);
    kernels::im2col3_omp(x.d.data(), h, w, c, cols_p.d.data());
    CHECK(bit_equal(cols, cols_p));
}

TEST_CASE("roi sampling copies cells verbatim for an aligned box") {
    // 8x8 map; box spanning cells [1,7) x [0,6) in both axes measured in
    // cell units, i.e. normalized (1/8, 0/8, 7/8, 6/8), pooled at r=6: bin
    // centers land exactly on cell centers.
    Rng rng(17);
    const int h = 8, w = 8, c = 2, r = 6;
    Tensor f = random_tensor(h * w, c, rng);
    const std::array<double, 4> box{1.0 / 8, 0.0, 7.0 / 8, 6.0 / 8};
    Tensor out(r * r, c);
    kernels::roi_bilinear(f.d.data(), h, w, c, box, r, out.d.data());
    for (int iy = 0; iy < r; ++iy)
        for (int ix = 0; ix < r; ++ix)
            for (int ch = 0; ch < c; ++ch)
                CHECK(out.at(iy * r + ix, ch) == f.at((iy + 0) * w + (ix + 1), ch));
}

TEST_CASE("roi sampling interpolates quarter-centers over the full image") {
    // 4x4 single-channel ramp, full box, r=2: samples at continuous cell
    // coordinates 0.5 and 2.5 in each axis.
    const int h = 4, w = 4, c = 1, r = 2;
    Tensor f(h * w, c);
    for (int i = 0; i < 16; ++i) f.d[static_cast<std::size_t>(i)] = i;
    const std::array<double, 4> box{0.0, 0.0, 1.0, 1.0};
    Tensor out(r * r, c);
    kernels::roi_bilinear(f.d.data(), h, w, c, box, r, out.d.data());
    // Sample (v=0.5, u=0.5): average of cells (0,0),(0,1),(1,0),(1,1) = (0+1+4+5)/4.
    CHECK(out.at(0, 0) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(out.at(1, 0) == doctest::Approx(4.5).epsilon(1e-12));
    CHECK(out.at(2, 0) == doctest::Approx(10.5).epsilon(1e-12));
    CHECK(out.at(3, 0) == doctest::Approx(12.5).epsilon(1e-12));
}

TEST_CASE("roi backward is the adjoint of roi forward") {
    Rng rng(18);
    const int h = 6, w = 5, c = 3, r = 4;
    Tensor f = random_tensor(h * w, c, rng);
    Tensor g = random_tensor(r * r, c, rng);
    const std::array<double, 4> box{0.13, 0.22, 0.81, 0.67};
    Tensor out(r * r, c);
    kernels::roi_bilinear(f.d.data(), h, w, c, box, r, out.d.data());
    Tensor ft = Tensor::zeros(h * w, c);
    kernels::roi_bilinear_backward(g.d.data(), h, w, c, box, r, ft.d.data());
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < out.d.size(); ++i) lhs += out.d[i] * g.d[i];
    for (std::size_t i = 0; i < f.d.size(); ++i) rhs += f.d[i] * ft.d[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("roi samples clamp to the feature map for out-of-range boxes") {
    const int h = 4, w = 4, c = 1, r = 2;
    Tensor f(h * w, c);
    for (int i = 0; i < 16; ++i) f.d[static_cast<std::size_t>(i)] = i;
    const std::array<double, 4> box{-0.5, -0.5, 1.5, 1.5};
    Tensor out(r * r, c);
    kernels::roi_bilinear(f.d.data(), h, w, c, box, r, out.d.data());
    for (double v : out.d) {
        CHECK(v >= 0.0);
        CHECK(v <= 15.0);
        CHECK(std::isfinite(v));
    }
}
