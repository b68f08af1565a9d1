#pragma once

#include <vector>

#include "nltrack/core/params.hpp"
#include "nltrack/core/tensor.hpp"

namespace nltrack::pipeline {

// Scale the whole gradient set so its global L2 norm is at most max_norm.
// Returns the pre-clip norm. Empty tensors (parameters the batch never
// touched) contribute nothing and stay empty.
double clip_global_norm(std::vector<Tensor>& grads, double max_norm);

// Adam with decoupled per-group learning rates. Moment state is keyed by
// parameter index and shaped lazily on first use; parameters with an empty
// gradient are skipped entirely, matching the convention that an untouched
// parameter has no gradient rather than a zero one.
class Adam {
public:
    explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    // lr applies to ParamGroup::main; encoder entries use lr * encoder_scale.
    void step(ParamStore& store, const std::vector<Tensor>& grads, double lr,
              double encoder_scale);

    int steps_taken() const { return t_; }

private:
    double beta1_, beta2_, eps_;
    int t_ = 0;
    std::vector<Tensor> m_, v_;
};

// Piecewise schedule: linear warmup to the base rate, then two step decays,
// to 0.1x at floor(2/3 * total) and 0.01x at floor(5/6 * total).
double lr_at(double base_lr, int step, int total_steps, int warmup_steps);

}  // namespace nltrack::pipeline
