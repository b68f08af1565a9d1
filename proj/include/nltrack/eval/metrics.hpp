#pragma once

#include <array>
#include <vector>

#include "nltrack/pipeline/box.hpp"

namespace nltrack::eval {

// Success plot over 21 overlap thresholds tau_j = j * 0.05, j = 0..20.
inline constexpr int kSuccessPoints = 21;
using Curve = std::array<double, kSuccessPoints>;

// Center-error threshold at the reference input scale; evaluation frames are
// much smaller, so the pixel threshold scales as frame_px / 320 to keep the
// metric's relative strictness.
inline constexpr double kPrecisionThresholdPx = 20.0;
inline constexpr double kReferenceFramePx = 320.0;

// Entry j = fraction of frames whose IoU is strictly above j * 0.05.
// Out-of-view frames enter as IoU 0. Empty input is an error.
Curve success_curve(const std::vector<double>& ious);
double auc_of(const Curve& c);  // mean of the 21 entries

double scaled_precision_threshold(double threshold_px, int frame_px);
double center_error_px(const pipeline::Box& a, const pipeline::Box& b, int frame_px);

// Fraction of frames with center error <= the scaled threshold (inclusive).
// Non-finite errors (out-of-view truth) never count as within.
double precision_within(const std::vector<double>& center_err_px, double threshold_px,
                        int frame_px);
// Entry j = fraction within threshold scaled * j / 10; entry 10 is the
// headline precision.
Curve precision_curve(const std::vector<double>& center_err_px, double threshold_px,
                      int frame_px);

double precision(const std::vector<pipeline::Box>& pred,
                 const std::vector<pipeline::Box>& gt, double threshold_px,
                 int frame_px);

// Fraction of predictions with IoU strictly above 0.5.
double grounding_accuracy(const std::vector<pipeline::Box>& pred,
                          const std::vector<pipeline::Box>& gt);

}  // namespace nltrack::eval
