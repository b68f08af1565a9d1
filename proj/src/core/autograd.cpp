#include "nltrack/core/autograd.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>
#include <utility>

#include "nltrack/common.hpp"
#include "nltrack/core/kernels.hpp"

namespace nltrack::ag {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) fail(ErrorCode::shape_error, msg);
}

void acc(Tensor& dst, const Tensor& src) {
    for (std::size_t i = 0; i < dst.d.size(); ++i) dst.d[i] += src.d[i];
}

void acc_neg(Tensor& dst, const Tensor& src) {
    for (std::size_t i = 0; i < dst.d.size(); ++i) dst.d[i] -= src.d[i];
}

}  // namespace

Var Graph::leaf(Tensor value, bool requires_grad) {
    nodes_.push_back({});
    Node& n = nodes_.back();
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    return Var(this, &n);
}

Var Graph::leaf_param(Tensor value, int param_index) {
    Var v = leaf(std::move(value), true);
    v.node()->param_index = param_index;
    return v;
}

Var Graph::make(Tensor value, std::initializer_list<Var> parents) {
    return make(std::move(value), std::vector<Var>(parents));
}

Var Graph::make(Tensor value, const std::vector<Var>& parents) {
    nodes_.push_back({});
    Node& n = nodes_.back();
    n.value = std::move(value);
    n.parents.reserve(parents.size());
    for (const Var& p : parents) {
        if (p.graph() != this) throw std::logic_error("node parented across graphs");
        n.parents.push_back(p.node());
        n.requires_grad = n.requires_grad || p.node()->requires_grad;
    }
    return Var(this, &n);
}

void Graph::backward(Var root) {
    if (swept_) throw std::logic_error("graph already swept");
    swept_ = true;
    require(root.rows() == 1 && root.cols() == 1, "backward root must be a scalar");
    if (!root.requires_grad()) return;

    // Iterative postorder over grad-requiring ancestry: parents first, so the
    // reversed list runs each node before anything it feeds.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    struct Frame {
        Node* n;
        std::size_t next;
    };
    std::vector<Frame> stack{{root.node(), 0}};
    seen.insert(root.node());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next < f.n->parents.size()) {
            Node* p = f.n->parents[f.next++];
            if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(f.n);
            stack.pop_back();
        }
    }

    root.node()->g().d[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backward) (*it)->backward();
}

// ---------------------------------------------------------------------------
// arithmetic
// ---------------------------------------------------------------------------

Var add(Var a, Var b) {
    require(same_shape(a.val(), b.val()), "add operand shapes disagree");
    Tensor v = a.val();
    acc(v, b.val());
    Var out = a.graph()->make(std::move(v), {a, b});
    if (out.requires_grad()) {
        Node *an = a.node(), *bn = b.node(), *on = out.node();
        on->backward = [an, bn, on] {
            if (an->requires_grad) acc(an->g(), on->g());
            if (bn->requires_grad) acc(bn->g(), on->g());
        };
    }
    return out;
}

Var sub(Var a, Var b) {
    require(same_shape(a.val(), b.val()), "sub operand shapes disagree");
    Tensor v = a.val();
    acc_neg(v, b.val());
    Var out = a.graph()->make(std::move(v), {a, b});
    if (out.requires_grad()) {
        Node *an = a.node(), *bn = b.node(), *on = out.node();
        on->backward = [an, bn, on] {
            if (an->requires_grad) acc(an->g(), on->g());
            if (bn->requires_grad) acc_neg(bn->g(), on->g());
        };
    }
    return out;
}

Var mul(Var a, Var b) {
    require(same_shape(a.val(), b.val()), "mul operand shapes disagree");
    Tensor v = a.val();
    for (std::size_t i = 0; i < v.d.size(); ++i) v.d[i] *= b.val().d[i];
    Var out = a.graph()->make(std::move(v), {a, b});
    if (out.requires_grad()) {
        Node *an = a.node(), *bn = b.node(), *on = out.node();
        on->backward = [an, bn, on] {
            const Tensor& d = on->g();
            if (an->requires_grad) {
                Tensor& ga = an->g();
                for (std::size_t i = 0; i < d.d.size(); ++i) ga.d[i] += d.d[i] * bn->value.d[i];
            }
            if (bn->requires_grad) {
                Tensor& gb = bn->g();
                for (std::size_t i = 0; i < d.d.size(); ++i) gb.d[i] += d.d[i] * an->value.d[i];
            }
        };
    }
    return out;
}

Var divide(Var a, Var b) {
    require(same_shape(a.val(), b.val()), "divide operand shapes disagree");
    Tensor v = a.val();
    for (std::size_t i = 0; i < v.d.size(); ++i) v.d[i] /= b.val().d[i];
    Var out = a.graph()->make(std::move(v), {a, b});
    if (out.requires_grad()) {
        Node *an = a.node(), *bn = b.node(), *on = out.node();
        on->backward = [an, bn, on] {
            const Tensor& d = on->g();
            if (an->requires_grad) {
                Tensor& ga = an->g();
                for (std::size_t i = 0; i < d.d.size(); ++i) ga.d[i] += d.d[i] / bn->value.d[i];
            }
            if (bn->requires_grad) {
                Tensor& gb = bn->g();
                for (std::size_t i = 0; i < d.d.size(); ++i)
                    gb.d[i] -= d.d[i] * on->value.d[i] / bn->value.d[i];
            }
        };
    }
    return out;
}

Var scale(Var a, double s) {
    Tensor v = a.val();
    for (double& x : v.d) x *= s;
    Var out = a.graph()->make(std::move(v), {a});
    if (out.requires_grad()) {
        Node *an = a.node(), *on = out.node();
        on->backward = [an, on, s] {
            Tensor& ga = an->g();
            const Tensor& d = on->g();
            for (std::size_t i = 0; i < d.d.size(); ++i) ga.d[i] += s * d.d[i];
        };
    }
    return out;
}

Var add_const(Var a, double c) {
    Tensor v = a.val();
    for (double& x : v.d) x += c;
    Var out = a.graph()->make(std::move(v), {a});
    if (out.requires_grad()) {
        Node *an = a.node(), *on = out.node();
        on->backward = [an, on] { acc(an->g(), on->g()); };
    }
    return out;
}

Var add_rowvec(Var a, Var v) {
    require(v.rows() == 1 && v.cols() == a.cols(), "row vector shape disagrees");
    Tensor out_v = a.val();
    for (int i = 0; i < out_v.rows; ++i)
        for (int j = 0; j < out_v.cols; ++j) out_v.at(i, j) += v.val().at(0, j);
    Var out = a.graph()->make(std::move(out_v), {a, v});
    if (out.requires_grad()) {
        Node *an = a.node(), *vn = v.node(), *on = out.node();
        on->backward = [an, vn, on] {
            const Tensor& d = on->g();
            if (an->requires_grad) acc(an->g(), d);
            if (vn->requires_grad) {
                Tensor& gv = vn->g();
                for (int i = 0; i < d.rows; ++i)
                    for (int j = 0; j < d.cols; ++j) gv.at(0, j) += d.at(i, j);
            }
        };
    }
    return out;
}

Var scale_rows(Var a, Var s) {
    require(s.cols() == 1 && s.rows() == a.rows(), "row scale shape disagrees");
    Tensor v = a.val();
    for (int i = 0; i < v.rows; ++i) {
        const double si = s.val().at(i, 0);
        for (int j = 0; j < v.cols; ++j) v.at(i, j) *= si;
    }
    Var out = a.graph()->make(std::move(v), {a, s});
    if (out.requires_grad()) {
        Node *an = a.node(), *sn = s.node(), *on = out.node();
        on->backward = [an, sn, on] {
            const Tensor& d = on->g();
            if (an->requires_grad) {
                Tensor& ga = an->g();
                for (int i = 0; i < d.rows; ++i) {
                    const double si = sn->value.at(i, 0);
                    for (int j = 0; j < d.cols; ++j) ga.at(i, j) += d.at(i, j) * si;
                }
            }
            if (sn->requires_grad) {
                Tensor& gs = sn->g();
                for (int i = 0; i < d.rows; ++i) {
                    double dot = 0.0;
                    for (int j = 0; j < d.cols; ++j) dot += d.at(i, j) * an->value.at(i, j);
                    gs.at(i, 0) += dot;
                }
            }
        };
    }
    return out;
}

Var relu(Var a) {
    Tensor v = a.val();
    for (double& x : v.d) x = x > 0.0 ? x : 0.0;
    Var out = a.graph()->make(std::move(v), {a});
    if (out.requires_grad()) {
        Node *an = a.node(), *on = out.node();
        on->backward = [an, on] {
            Tensor& ga = an->g();
            const Tensor& d = on->g();
            for (std::size_t i = 0; i < d.d.size(); ++i)
                if (an->value.d[i] > 0.0) ga.d[i] += d.d[i];
        };
    }
    return out;
}

Var abs_val(Var a) {
    Tensor v = a.val();
    for (double& x : v.d) x = std::fabs(x);
    Var out = a.graph()->make(std::move(v), {a});
    if (out.requires_grad()) {
        Node *an = a.node(), *on = out.node();
        on->backward = [an, on] {
            Tensor& ga = an->g();
            const Tensor& d = on->g();
            for (std::size_t i = 0; i < d.d.size(); ++i) {
                const double x = an->value.d[i];
                if (x > 0.0)
                    ga.d[i] += d.d[i];
                else if (x < 0.0)
                    ga.d[i] -= d.d[i];
            }
        };
    }
    return out;
}

namespace {

// pick_a(a_i, b_i) decides which operand an element's gradient follows; ties
// go to a so the subgradient choice is deterministic.
template <typename Pick>
Var select_binary(Var a, Var b, Pick pick_a) {
    require(same_shape(a.val(), b.val()), "operand shapes disagree");
    Tensor v = a.val();
    for (std::size_t i = 0; i < v.d.size(); ++i)
        v.d[i] = pick_a(a.val().d[i], b.val().d[i]) ? a.val().d[i] : b.val().d[i];
    Var out = a.graph()->make(std::move(v), {a, b});
    if (out.requires_grad()) {
        Node *an = a.node(), *bn = b.node(), *on = out.node();
        on->backward = [an, bn, on, pick_a] {
            const Tensor& d = on->g();
            for (std::size_t i = 0; i < d.d.size(); ++i) {
                if (pick_a(an->value.d[i], bn->value.d[i])) {
                    if (an->requires_grad) an->g().d[i] += d.d[i];
                } else {
                    if (bn->requires_grad) bn->g().d[i] += d.d[i];
                }
            }
        };
    }
    return out;
}

}  // namespace

Var maximum(Var a, Var b) {
    return select_binary(a, b, [](double x, double y) { return x >= y; });
}

Var minimum(Var a, Var b) {
    return select_binary(a, b, [](double x, double y) { return x <= y; });
}

Var sum_all(Var a) {
    double s = 0.0;
    for (double x : a.val().d) s += x;
    Var out = a.graph()->make(Tensor::scalar(s), {a});
    if (out.requires_grad()) {
        Node *an = a.node(), *on = out.node();
        on->backward = [an, on] {
            Tensor& ga = an->g();
            const double d = on->g().d[0];
            for (double& x : ga.d) x += d;
        };
    }
    return out;
}

Var mean_all(Var a) {
    return scale(sum_all(a), 1.0 / static_cast<double>(a.val().d.size()));
}

// ---------------------------------------------------------------------------
// linear algebra
// ---------------------------------------------------------------------------

namespace {

enum class MM { nn, nt, tn };

Var matmul_impl(Var a, Var b, MM mode) {
    const bool ta = mode == MM::tn;
    const bool tb = mode == MM::nt;
    Tensor v = kernels::matmul(a.val(), ta, b.val(), tb);
    Var out = a.graph()->make(std::move(v), {a, b});
    if (out.requires_grad()) {
        Node *an = a.node(), *bn = b.node(), *on = out.node();
        on->backward = [an, bn, on, mode] {
            const Tensor& d = on->g();
            switch (mode) {
                case MM::nn:
                    if (an->requires_grad) kernels::matmul_acc(d, false, bn->value, true, an->g());
                    if (bn->requires_grad) kernels::matmul_acc(an->value, true, d, false, bn->g());
                    break;
                case MM::nt:  // c = a * b^T
                    if (an->requires_grad) kernels::matmul_acc(d, false, bn->value, false, an->g());
                    if (bn->requires_grad) kernels::matmul_acc(d, true, an->value, false, bn->g());
                    break;
                case MM::tn:  // c = a^T * b
                    if (an->requires_grad) kernels::matmul_acc(bn->value, false, d, true, an->g());
                    if (bn->requires_grad) kernels::matmul_acc(an->value, false, d, false, bn->g());
                    break;
            }
        };
    }
    return out;
}

}  // namespace

Var matmul(Var a, Var b) { return matmul_impl(a, b, MM::nn); }
Var matmul_nt(Var a, Var b) { return matmul_impl(a, b, MM::nt); }
Var matmul_tn(Var a, Var b) { return matmul_impl(a, b, MM::tn); }

// ---------------------------------------------------------------------------
// neural ops
// ---------------------------------------------------------------------------

Var softmax_rows(Var a, std::vector<std::uint8_t> key_mask) {
    require(key_mask.empty() || static_cast<int>(key_mask.size()) == a.cols(),
            "softmax key mask length disagrees");
    const std::uint8_t* mp = key_mask.empty() ? nullptr : key_mask.data();
    Tensor v = Tensor::zeros(a.rows(), a.cols());
    kernels::softmax_rows(a.val().d.data(), a.rows(), a.cols(), mp, v.d.data());
    Var out = a.graph()->make(std::move(v), {a});
    if (out.requires_grad()) {
        Node *an = a.node(), *on = out.node();
        on->backward = [an, on, mask = std::move(key_mask)] {
            const std::uint8_t* m = mask.empty() ? nullptr : mask.data();
            kernels::softmax_rows_backward(on->value.d.data(), on->g().d.data(), on->value.rows,
                                           on->value.cols, m, an->g().d.data());
        };
    }
    return out;
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
    require(gamma.rows() == 1 && gamma.cols() == x.cols(), "layer norm gamma shape disagrees");
    require(beta.rows() == 1 && beta.cols() == x.cols(), "layer norm beta shape disagrees");
    const int m = x.rows(), n = x.cols();
    Tensor v = Tensor::zeros(m, n);
    std::vector<double> mean(static_cast<std::size_t>(m)), inv(static_cast<std::size_t>(m));
    kernels::layer_norm(x.val().d.data(), m, n, gamma.val().d.data(), beta.val().d.data(), eps,
                        v.d.data(), mean.data(), inv.data());
    Var out = x.graph()->make(std::move(v), {x, gamma, beta});
    if (out.requires_grad()) {
        Node *xn = x.node(), *gn = gamma.node(), *bn = beta.node(), *on = out.node();
        on->backward = [xn, gn, bn, on, mean = std::move(mean), inv = std::move(inv)] {
            const int m2 = xn->value.rows, n2 = xn->value.cols;
            // The kernel fuses all three adjoints; route each into its tensor
            // (scratch rows for operands that do not require gradients).
            Tensor dg_scratch, db_scratch, dx_scratch;
            double* dxp;
            double* dgp;
            double* dbp;
            if (xn->requires_grad) {
                dxp = xn->g().d.data();
            } else {
                dx_scratch = Tensor::zeros(m2, n2);
                dxp = dx_scratch.d.data();
            }
            if (gn->requires_grad) {
                dgp = gn->g().d.data();
            } else {
                dg_scratch = Tensor::zeros(1, n2);
                dgp = dg_scratch.d.data();
            }
            if (bn->requires_grad) {
                dbp = bn->g().d.data();
            } else {
                db_scratch = Tensor::zeros(1, n2);
                dbp = db_scratch.d.data();
            }
            kernels::layer_norm_backward(xn->value.d.data(), on->g().d.data(), m2, n2,
                                         gn->value.d.data(), mean.data(), inv.data(), dxp, dgp,
                                         dbp);
        };
    }
    return out;
}

Var embedding(Var table, std::vector<int> ids) {
    const int d = table.cols();
    for (int id : ids)
        require(id >= 0 && id < table.rows(), "embedding id out of range");
    Tensor v = Tensor::zeros(static_cast<int>(ids.size()), d);
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (int j = 0; j < d; ++j) v.at(static_cast<int>(i), j) = table.val().at(ids[i], j);
    Var out = table.graph()->make(std::move(v), {table});
    if (out.requires_grad()) {
        Node *tn = table.node(), *on = out.node();
        on->backward = [tn, on, ids = std::move(ids)] {
            Tensor& gt = tn->g();
            const Tensor& d2 = on->g();
            for (std::size_t i = 0; i < ids.size(); ++i)
                for (int j = 0; j < d2.cols; ++j)
                    gt.at(ids[i], j) += d2.at(static_cast<int>(i), j);
        };
    }
    return out;
}

// ---------------------------------------------------------------------------
// shape ops
// ---------------------------------------------------------------------------

Var reshape(Var a, int rows, int cols) {
    require(rows > 0 && cols > 0 &&
                static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) == a.val().d.size(),
            "reshape changes element count");
    Tensor v(rows, cols);
    v.d = a.val().d;
    Var out = a.graph()->make(std::move(v), {a});
    if (out.requires_grad()) {
        Node *an = a.node(), *on = out.node();
        on->backward = [an, on] {
            Tensor& ga = an->g();
            const Tensor& d = on->g();
            for (std::size_t i = 0; i < d.d.size(); ++i) ga.d[i] += d.d[i];
        };
    }
    return out;
}

Var concat_rows(const std::vector<Var>& parts) {
    require(!parts.empty(), "concat of nothing");
    const int cols = parts[0].cols();
    int rows = 0;
    for (const Var& p : parts) {
        require(p.cols() == cols, "concat column counts disagree");
        rows += p.rows();
    }
    Tensor v = Tensor::zeros(rows, cols);
    int at = 0;
    for (const Var& p : parts) {
        std::copy(p.val().d.begin(), p.val().d.end(),
                  v.d.begin() + static_cast<std::size_t>(at) * cols);
        at += p.rows();
    }
    Var out = parts[0].graph()->make(std::move(v), parts);
    if (out.requires_grad()) {
        Node* on = out.node();
        std::vector<Node*> pn;
        pn.reserve(parts.size());
        for (const Var& p : parts) pn.push_back(p.node());
        on->backward = [on, pn = std::move(pn)] {
            const Tensor& d = on->g();
            int row = 0;
            for (Node* p : pn) {
                if (p->requires_grad) {
                    Tensor& gp = p->g();
                    for (int i = 0; i < p->value.rows; ++i)
                        for (int j = 0; j < d.cols; ++j) gp.at(i, j) += d.at(row + i, j);
                }
                row += p->value.rows;
            }
        };
    }
    return out;
}

Var slice_rows(Var a, int begin, int end) {
    require(0 <= begin && begin < end && end <= a.rows(), "row slice out of range");
    const int cols = a.cols();
    Tensor v = Tensor::zeros(end - begin, cols);
    std::copy(a.val().d.begin() + static_cast<std::size_t>(begin) * cols,
              a.val().d.begin() + static_cast<std::size_t>(end) * cols, v.d.begin());
    Var out = a.graph()->make(std::move(v), {a});
    if (out.requires_grad()) {
        Node *an = a.node(), *on = out.node();
        on->backward = [an, on, begin] {
            Tensor& ga = an->g();
            const Tensor& d = on->g();
            for (int i = 0; i < d.rows; ++i)
                for (int j = 0; j < d.cols; ++j) ga.at(begin + i, j) += d.at(i, j);
        };
    }
    return out;
}

Var concat_cols(const std::vector<Var>& parts) {
    require(!parts.empty(), "concat of nothing");
    const int rows = parts[0].rows();
    int cols = 0;
    for (const Var& p : parts) {
        require(p.rows() == rows, "concat row counts disagree");
        cols += p.cols();
    }
    Tensor v = Tensor::zeros(rows, cols);
    int at = 0;
    for (const Var& p : parts) {
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < p.cols(); ++j) v.at(i, at + j) = p.val().at(i, j);
        at += p.cols();
    }
    Var out = parts[0].graph()->make(std::move(v), parts);
    if (out.requires_grad()) {
        Node* on = out.node();
        std::vector<Node*> pn;
        pn.reserve(parts.size());
        for (const Var& p : parts) pn.push_back(p.node());
        on->backward = [on, pn = std::move(pn)] {
            const Tensor& d = on->g();
            int col = 0;
            for (Node* p : pn) {
                if (p->requires_grad) {
                    Tensor& gp = p->g();
                    for (int i = 0; i < d.rows; ++i)
                        for (int j = 0; j < p->value.cols; ++j) gp.at(i, j) += d.at(i, col + j);
                }
                col += p->value.cols;
            }
        };
    }
    return out;
}

Var slice_cols(Var a, int begin, int end) {
    require(0 <= begin && begin < end && end <= a.cols(), "column slice out of range");
    Tensor v = Tensor::zeros(a.rows(), end - begin);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = begin; j < end; ++j) v.at(i, j - begin) = a.val().at(i, j);
    Var out = a.graph()->make(std::move(v), {a});
    if (out.requires_grad()) {
        Node *an = a.node(), *on = out.node();
        on->backward = [an, on, begin] {
            Tensor& ga = an->g();
            const Tensor& d = on->g();
            for (int i = 0; i < d.rows; ++i)
                for (int j = 0; j < d.cols; ++j) ga.at(i, begin + j) += d.at(i, j);
        };
    }
    return out;
}

// ---------------------------------------------------------------------------
// structured ops
// ---------------------------------------------------------------------------

Var conv3x3(Var x, int h, int w, Var weight, Var bias) {
    const int cin = x.cols();
    require(x.rows() == h * w, "raster shape disagrees with h*w");
    require(weight.rows() == 9 * cin, "conv weight rows must be 9*cin");
    require(bias.rows() == 1 && bias.cols() == weight.cols(), "conv bias shape disagrees");
    const int cout = weight.cols();

    Tensor cols = Tensor::zeros(h * w, 9 * cin);
    kernels::im2col3(x.val().d.data(), h, w, cin, cols.d.data());
    Tensor v = kernels::matmul(cols, false, weight.val(), false);
    for (int i = 0; i < v.rows; ++i)
        for (int j = 0; j < cout; ++j) v.at(i, j) += bias.val().at(0, j);

    Var out = x.graph()->make(std::move(v), {x, weight, bias});
    if (out.requires_grad()) {
        Node *xn = x.node(), *wn = weight.node(), *bn = bias.node(), *on = out.node();
        on->backward = [xn, wn, bn, on, cols = std::move(cols), h, w, cin] {
            const Tensor& d = on->g();
            if (bn->requires_grad) {
                Tensor& gb = bn->g();
                for (int i = 0; i < d.rows; ++i)
                    for (int j = 0; j < d.cols; ++j) gb.at(0, j) += d.at(i, j);
            }
            if (wn->requires_grad) kernels::matmul_acc(cols, true, d, false, wn->g());
            if (xn->requires_grad) {
                Tensor dcols = kernels::matmul(d, false, wn->value, true);
                kernels::col2im3_acc(dcols.d.data(), h, w, cin, xn->g().d.data());
            }
        };
    }
    return out;
}

Var roi_bilinear(Var feat, int h, int w, std::array<double, 4> box, int r) {
    const int c = feat.cols();
    require(feat.rows() == h * w, "raster shape disagrees with h*w");
    Tensor v = Tensor::zeros(r * r, c);
    kernels::roi_bilinear(feat.val().d.data(), h, w, c, box, r, v.d.data());
    Var out = feat.graph()->make(std::move(v), {feat});
    if (out.requires_grad()) {
        Node *fn = feat.node(), *on = out.node();
        on->backward = [fn, on, box, h, w, c, r] {
            kernels::roi_bilinear_backward(on->g().d.data(), h, w, c, box, r, fn->g().d.data());
        };
    }
    return out;
}

}  // namespace nltrack::ag
