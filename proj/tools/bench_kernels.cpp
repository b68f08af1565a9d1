// Timing table for the compute kernels: serial reference vs the OpenMP path
// at the requested thread count, plus a bitwise-equality check on each shape.
//
// Usage: bench_kernels [threads] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "nltrack/core/kernels.hpp"
#include "nltrack/core/rng.hpp"
#include "nltrack/core/tensor.hpp"

using namespace nltrack;

namespace {

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

Tensor random_tensor(int r, int c, Rng& rng) {
    Tensor t(r, c);
    for (double& x : t.d) x = rng.normal();
    return t;
}

template <typename F>
double time_best(F&& f, int repeats) {
    double best = 1e100;
    for (int i = 0; i < repeats; ++i) {
        const double t0 = now_s();
        f();
        best = std::min(best, now_s() - t0);
    }
    return best;
}

struct MatShape {
    int m, k, n;
};

}  // namespace

int main(int argc, char** argv) {
    const int threads = argc > 1 ? std::atoi(argv[1]) : 4;
    const int repeats = argc > 2 ? std::atoi(argv[2]) : 7;
    Rng rng(7);

    std::printf("kernel benchmark: serial reference vs OpenMP path (%d threads)\n", threads);
    std::printf("%-34s %12s %12s %8s %6s\n", "case", "serial ms", "omp ms", "speedup", "equal");

    const MatShape shapes[] = {{156, 64, 64}, {156, 64, 156}, {100, 256, 64}, {512, 512, 512}};
    for (const MatShape s : shapes) {
        Tensor a = random_tensor(s.m, s.k, rng);
        Tensor b = random_tensor(s.k, s.n, rng);
        Tensor c_serial(s.m, s.n), c_omp(s.m, s.n);
        const double ts = time_best(
            [&] { kernels::matmul_serial(a.d.data(), b.d.data(), c_serial.d.data(), s.m, s.k, s.n, false); },
            repeats);
        kernels::set_threads(threads);
        const double tp = time_best(
            [&] { kernels::matmul_omp(a.d.data(), b.d.data(), c_omp.d.data(), s.m, s.k, s.n, false); },
            repeats);
        kernels::set_threads(1);
        char label[64];
        std::snprintf(label, sizeof(label), "matmul %dx%dx%d", s.m, s.k, s.n);
        std::printf("%-34s %12.3f %12.3f %7.2fx %6s\n", label, ts * 1e3, tp * 1e3, ts / tp,
                    bit_equal(c_serial, c_omp) ? "yes" : "NO");
    }

    {
        const int m = 2048, n = 156;
        Tensor x = random_tensor(m, n, rng);
        Tensor y_serial(m, n), y_omp(m, n);
        std::vector<std::uint8_t> mask(n, 0);
        for (int j = 0; j < n; j += 5) mask[static_cast<std::size_t>(j)] = 1;
        const double ts = time_best(
            [&] { kernels::softmax_rows_serial(x.d.data(), m, n, mask.data(), y_serial.d.data()); },
            repeats);
        kernels::set_threads(threads);
        const double tp = time_best(
            [&] { kernels::softmax_rows_omp(x.d.data(), m, n, mask.data(), y_omp.d.data()); },
            repeats);
        kernels::set_threads(1);
        std::printf("%-34s %12.3f %12.3f %7.2fx %6s\n", "softmax 2048x156 masked", ts * 1e3,
                    tp * 1e3, ts / tp, bit_equal(y_serial, y_omp) ? "yes" : "NO");
    }

    {
        const int m = 4096, n = 64;
        Tensor x = random_tensor(m, n, rng);
        Tensor g = Tensor::full(1, n, 1.0), be = Tensor::zeros(1, n);
        Tensor y_serial(m, n), y_omp(m, n);
        std::vector<double> mu(m), inv(m);
        const double ts = time_best(
            [&] {
                kernels::layer_norm_serial(x.d.data(), m, n, g.d.data(), be.d.data(), 1e-5,
                                           y_serial.d.data(), mu.data(), inv.data());
            },
            repeats);
        kernels::set_threads(threads);
        const double tp = time_best(
            [&] {
                kernels::layer_norm_omp(x.d.data(), m, n, g.d.data(), be.d.data(), 1e-5,
                                        y_omp.d.data(), mu.data(), inv.data());
            },
            repeats);
        kernels::set_threads(1);
        std::printf("%-34s %12.3f %12.3f %7.2fx %6s\n", "layer_norm 4096x64", ts * 1e3, tp * 1e3,
                    ts / tp, bit_equal(y_serial, y_omp) ? "yes" : "NO");
    }

    {
        const int h = 40, w = 40, c = 64;
        Tensor x = random_tensor(h * w, c, rng);
        Tensor cols_serial(h * w, 9 * c), cols_omp(h * w, 9 * c);
        const double ts = time_best(
            [&] { kernels::im2col3_serial(x.d.data(), h, w, c, cols_serial.d.data()); }, repeats);
        kernels::set_threads(threads);
        const double tp = time_best(
            [&] { kernels::im2col3_omp(x.d.data(), h, w, c, cols_omp.d.data()); }, repeats);
        kernels::set_threads(1);
        std::printf("%-34s %12.3f %12.3f %7.2fx %6s\n", "im2col3 40x40x64", ts * 1e3, tp * 1e3,
                    ts / tp, bit_equal(cols_serial, cols_omp) ? "yes" : "NO");
    }

    return 0;
}
