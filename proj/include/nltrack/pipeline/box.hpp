#pragma once

#include <array>

#include "nltrack/core/autograd.hpp"

namespace nltrack::pipeline {

// Axis-aligned box (x1, y1, x2, y2), normalized to the image it lives in.
using Box = std::array<double, 4>;

bool box_valid(const Box& b);  // finite with strictly positive sides
Box clamp_unit(const Box& b);  // clamp every coordinate to [0, 1]

// Both throw degenerate_box on invalid input.
double iou(const Box& a, const Box& b);
double giou(const Box& a, const Box& b);  // IoU - (|C| - |A∪B|)/|C|

// Differentiable GIoU of two [1,4] coordinate rows; the caller guarantees
// positive sides (the box head's clamped output, or a dataset box).
ag::Var giou_var(ag::Var a, ag::Var b);

// lambda_giou * (1 - giou(clamped, gt)) + lambda_l1 * mean|raw - gt|. The
// overlap term sees the clamped box so its area stays positive; the L1 term
// sees the raw coordinates so degenerate predictions are still pulled apart.
ag::Var box_loss(ag::Var raw, ag::Var clamped, ag::Var gt, double lambda_giou,
                 double lambda_l1);

}  // namespace nltrack::pipeline
