#pragma once

#include <string>
#include <vector>

#include "nltrack/eval/metrics.hpp"
#include "nltrack/model/joint.hpp"
#include "nltrack/synth/world.hpp"

namespace nltrack::eval {

// Sequence initialization: language only (grounding supplies the first box)
// or language plus the first-frame truth box.
enum class Protocol { nl_only, nl_bb };

const char* protocol_name(Protocol p);
Protocol protocol_from_name(const std::string& name);

struct SequenceScore {
    std::string id;  // "<index>:<seed>"
    bool failed = false;
    std::string error;  // one-line error when failed
    double ground_iou = 0.0;
    std::vector<double> ious;           // frames 1..T-1; out-of-view truth scores 0
    std::vector<double> center_err_px;  // +inf on out-of-view truth
    Curve curve{};
    double auc = 0.0;
    double precision = 0.0;
};

struct MetricsReport {
    Protocol protocol = Protocol::nl_only;
    int frame_px = 0;
    double threshold_px = kPrecisionThresholdPx;
    int sequences = 0;
    int failures = 0;
    Curve success{};
    Curve precision_points{};
    double auc = 0.0;
    double precision = 0.0;
    double grounding_acc = 0.0;
    std::vector<SequenceScore> per_sequence;
};

// Throws config_invalid if any report invariant is broken: the AUC must equal
// the mean of the success curve and every value must sit in [0,1].
void validate_report(const MetricsReport& r);

// Frame 0 is always grounded (it feeds the grounding score, and under NL_ONLY
// the initial box); frames 1..T-1 are tracked and scored. Any error inside a
// sequence marks it failed with all-zero scores instead of aborting the run.
SequenceScore score_sequence(const model::JointModel& m, const synth::SequenceSample& s,
                             Protocol p, int index, double threshold_px);

// Equal-weight average over sequences; failed sequences keep their zero
// curves so a failure can never raise an aggregate.
MetricsReport aggregate(std::vector<SequenceScore> scores, Protocol p, int frame_px,
                        double threshold_px);

MetricsReport evaluate(const model::JointModel& m,
                       const std::vector<synth::SequenceSample>& dataset, Protocol p,
                       double threshold_px = kPrecisionThresholdPx);

std::string report_text(const MetricsReport& r);  // one record per line
std::string report_json(const MetricsReport& r);

}  // namespace nltrack::eval
