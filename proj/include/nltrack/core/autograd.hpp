#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "nltrack/core/tensor.hpp"

namespace nltrack::ag {

class Graph;

// One tape entry. Parents are raw pointers into the owning graph's deque
// (stable under push_back). The backward closure accumulates into parent
// grads; it is only installed when the node requires gradients, so inference
// graphs carry no closures and no cached intermediates.
struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool grad_alloc = false;
    int param_index = -1;
    std::vector<Node*> parents;
    std::function<void()> backward;

    Tensor& g() {
        if (!grad_alloc) {
            grad = Tensor::zeros(value.rows, value.cols);
            grad_alloc = true;
        }
        return grad;
    }
};

// Lightweight handle; validity is tied to the graph's lifetime.
class Var {
public:
    Var() = default;
    Var(Graph* g, Node* n) : g_(g), n_(n) {}

    const Tensor& val() const { return n_->value; }
    Tensor& grad() const { return n_->g(); }
    bool requires_grad() const { return n_->requires_grad; }
    int rows() const { return n_->value.rows; }
    int cols() const { return n_->value.cols; }
    Node* node() const { return n_; }
    Graph* graph() const { return g_; }
    explicit operator bool() const { return n_ != nullptr; }

private:
    Graph* g_ = nullptr;
    Node* n_ = nullptr;
};

class Graph {
public:
    Var leaf(Tensor value, bool requires_grad = false);
    Var leaf_param(Tensor value, int param_index);

    // New node whose requires_grad is the OR over parents. The closure is
    // installed by the op only when the node requires gradients.
    Var make(Tensor value, std::initializer_list<Var> parents);
    Var make(Tensor value, const std::vector<Var>& parents);

    // Reverse-mode sweep from a scalar root. One sweep per graph.
    void backward(Var root);

    std::size_t size() const { return nodes_.size(); }

private:
    std::deque<Node> nodes_;
    bool swept_ = false;
};

// --- arithmetic -------------------------------------------------------------
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var divide(Var a, Var b);
Var scale(Var a, double s);
Var add_const(Var a, double c);
Var add_rowvec(Var a, Var v);    // v: [1,n] broadcast down rows
Var scale_rows(Var a, Var s);    // s: [m,1] per-row scalar
Var relu(Var a);
Var abs_val(Var a);
Var maximum(Var a, Var b);
Var minimum(Var a, Var b);
Var sum_all(Var a);              // -> [1,1]
Var mean_all(Var a);             // -> [1,1]

// --- linear algebra ---------------------------------------------------------
Var matmul(Var a, Var b);        // [m,k] x [k,n]
Var matmul_nt(Var a, Var b);     // [m,k] x [n,k]^T
Var matmul_tn(Var a, Var b);     // [k,m]^T x [k,n]

// --- neural ops ------------------------------------------------------------
// key_mask (may be empty): length = a.cols, 1 = ignore. Masked columns are
// exactly zero in the output and receive no gradient.
Var softmax_rows(Var a, std::vector<std::uint8_t> key_mask = {});
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
Var embedding(Var table, std::vector<int> ids);

// --- shape ops --------------------------------------------------------------
Var reshape(Var a, int rows, int cols);  // element count preserved, row-major
Var concat_rows(const std::vector<Var>& parts);
Var slice_rows(Var a, int begin, int end);
Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(Var a, int begin, int end);

// --- structured ops ---------------------------------------------------------
// x: [h*w, cin] raster; weight: [9*cin, cout]; bias: [1, cout].
Var conv3x3(Var x, int h, int w, Var weight, Var bias);
// feat: [h*w, c]; box normalized (x1,y1,x2,y2), treated as constant.
Var roi_bilinear(Var feat, int h, int w, std::array<double, 4> box, int r);

}  // namespace nltrack::ag
