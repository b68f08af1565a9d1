#include "nltrack/pipeline/optim.hpp"

#include <cmath>

#include "nltrack/common.hpp"

namespace nltrack::pipeline {

double clip_global_norm(std::vector<Tensor>& grads, double max_norm) {
    double sq = 0.0;
    for (const Tensor& g : grads)
        for (double v : g.d) sq += v * v;
    double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        double s = max_norm / norm;
        for (Tensor& g : grads)
            for (double& v : g.d) v *= s;
    }
    return norm;
}

Adam::Adam(double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(ParamStore& store, const std::vector<Tensor>& grads, double lr,
                double encoder_scale) {
    if (static_cast<int>(grads.size()) != store.count())
        fail(ErrorCode::shape_error, "gradient list does not match the parameter table");
    if (m_.empty()) {
        m_.resize(grads.size());
        v_.resize(grads.size());
    }
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, t_);
    double bc2 = 1.0 - std::pow(beta2_, t_);
    for (int i = 0; i < store.count(); ++i) {
        const Tensor& g = grads[static_cast<std::size_t>(i)];
        if (g.d.empty()) continue;
        ParamStore::Entry& e = store.entry(i);
        if (g.rows != e.value.rows || g.cols != e.value.cols)
            fail(ErrorCode::shape_error, "gradient shape mismatch for " + e.name);
        Tensor& m = m_[static_cast<std::size_t>(i)];
        Tensor& v = v_[static_cast<std::size_t>(i)];
        if (m.d.empty()) {
            m = Tensor::zeros(g.rows, g.cols);
            v = Tensor::zeros(g.rows, g.cols);
        }
        double rate = lr * (e.group == ParamGroup::encoder ? encoder_scale : 1.0);
        for (std::size_t k = 0; k < g.d.size(); ++k) {
            m.d[k] = beta1_ * m.d[k] + (1.0 - beta1_) * g.d[k];
            v.d[k] = beta2_ * v.d[k] + (1.0 - beta2_) * g.d[k] * g.d[k];
            double mhat = m.d[k] / bc1;
            double vhat = v.d[k] / bc2;
            e.value.d[k] -= rate * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

double lr_at(double base_lr, int step, int total_steps, int warmup_steps) {
    if (step < 0 || total_steps <= 0)
        fail(ErrorCode::config_invalid, "schedule needs a nonnegative step and positive total");
    double warm = 1.0;
    if (warmup_steps > 0 && step < warmup_steps)
        warm = static_cast<double>(step + 1) / warmup_steps;
    double decay = 1.0;
    if (step >= 5 * total_steps / 6)
        decay = 0.01;
    else if (step >= 2 * total_steps / 3)
        decay = 0.1;
    return base_lr * warm * decay;
}

}  // namespace nltrack::pipeline
