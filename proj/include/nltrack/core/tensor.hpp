#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace nltrack {

// Dense row-major 2-D matrix of doubles. Everything that flows through the
// model (sequences, weights, boxes, scalars) is 2-D; grid shapes and masks
// travel alongside where needed.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> d;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), d(static_cast<std::size_t>(r) * c, 0.0) {
        assert(r >= 0 && c >= 0);
    }

    static Tensor zeros(int r, int c) { return Tensor(r, c); }

    static Tensor full(int r, int c, double v) {
        Tensor t(r, c);
        for (auto& x : t.d) x = v;
        return t;
    }

    static Tensor row4(double a, double b, double c, double e) {
        Tensor t(1, 4);
        t.d = {a, b, c, e};
        return t;
    }

    static Tensor scalar(double v) {
        Tensor t(1, 1);
        t.d[0] = v;
        return t;
    }

    std::size_t numel() const { return d.size(); }
    bool empty() const { return d.empty(); }

    double& at(int r, int c) { return d[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return d[static_cast<std::size_t>(r) * cols + c]; }

    double* row(int r) { return d.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return d.data() + static_cast<std::size_t>(r) * cols; }

    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

    void fill(double v) {
        for (auto& x : d) x = v;
    }

    bool all_finite() const {
        for (double x : d)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

inline bool same_shape(const Tensor& a, const Tensor& b) { return a.same_shape(b); }

inline bool bit_equal(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.d.size(); ++i)
        if (a.d[i] != b.d[i]) return false;
    return true;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
    assert(a.same_shape(b));
    double m = 0.0;
    for (std::size_t i = 0; i < a.d.size(); ++i) {
        double v = std::fabs(a.d[i] - b.d[i]);
        if (v > m) m = v;
    }
    return m;
}

}  // namespace nltrack
