#include "nltrack/eval/metrics.hpp"

#include <cmath>

#include "nltrack/common.hpp"

namespace nltrack::eval {

Curve success_curve(const std::vector<double>& ious) {
    if (ious.empty())
        fail(ErrorCode::config_invalid, "success curve needs at least one frame");
    Curve c{};
    for (int j = 0; j < kSuccessPoints; ++j) {
        double tau = j * 0.05;
        int hits = 0;
        for (double v : ious)
            if (v > tau) ++hits;
        c[static_cast<std::size_t>(j)] = static_cast<double>(hits) / ious.size();
    }
    return c;
}

double auc_of(const Curve& c) {
    double s = 0.0;
    for (double v : c) s += v;
    return s / kSuccessPoints;
}

double scaled_precision_threshold(double threshold_px, int frame_px) {
    if (threshold_px <= 0.0 || frame_px <= 0)
        fail(ErrorCode::config_invalid, "precision threshold and frame size must be positive");
    return threshold_px * frame_px / kReferenceFramePx;
}

double center_error_px(const pipeline::Box& a, const pipeline::Box& b, int frame_px) {
    double dx = 0.5 * ((a[0] + a[2]) - (b[0] + b[2])) * frame_px;
    double dy = 0.5 * ((a[1] + a[3]) - (b[1] + b[3])) * frame_px;
    return std::sqrt(dx * dx + dy * dy);
}

double precision_within(const std::vector<double>& center_err_px, double threshold_px,
                        int frame_px) {
    if (center_err_px.empty())
        fail(ErrorCode::config_invalid, "precision needs at least one frame");
    double t = scaled_precision_threshold(threshold_px, frame_px);
    int hits = 0;
    for (double e : center_err_px)
        if (std::isfinite(e) && e <= t) ++hits;
    return static_cast<double>(hits) / center_err_px.size();
}

Curve precision_curve(const std::vector<double>& center_err_px, double threshold_px,
                      int frame_px) {
    if (center_err_px.empty())
        fail(ErrorCode::config_invalid, "precision curve needs at least one frame");
    double t = scaled_precision_threshold(threshold_px, frame_px);
    Curve c{};
    for (int j = 0; j < kSuccessPoints; ++j) {
        double tj = t * j / 10.0;
        int hits = 0;
        for (double e : center_err_px)
            if (std::isfinite(e) && e <= tj) ++hits;
        c[static_cast<std::size_t>(j)] = static_cast<double>(hits) / center_err_px.size();
    }
    return c;
}

double precision(const std::vector<pipeline::Box>& pred,
                 const std::vector<pipeline::Box>& gt, double threshold_px,
                 int frame_px) {
    if (pred.size() != gt.size())
        fail(ErrorCode::shape_error, "prediction and truth lists differ in length");
    std::vector<double> err;
    err.reserve(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i)
        err.push_back(center_error_px(pred[i], gt[i], frame_px));
    return precision_within(err, threshold_px, frame_px);
}

double grounding_accuracy(const std::vector<pipeline::Box>& pred,
                          const std::vector<pipeline::Box>& gt) {
    if (pred.size() != gt.size())
        fail(ErrorCode::shape_error, "prediction and truth lists differ in length");
    if (pred.empty())
        fail(ErrorCode::config_invalid, "grounding accuracy needs at least one pair");
    int hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pipeline::iou(pred[i], gt[i]) > 0.5) ++hits;
    return static_cast<double>(hits) / pred.size();
}

}  // namespace nltrack::eval
