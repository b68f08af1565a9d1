#include "nltrack/eval/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include <json.hpp>

#include "nltrack/pipeline/tracker.hpp"

namespace nltrack::eval {

const char* protocol_name(Protocol p) {
    return p == Protocol::nl_only ? "NL_ONLY" : "NL_BB";
}

Protocol protocol_from_name(const std::string& name) {
    if (name == "NL_ONLY" || name == "nl_only") return Protocol::nl_only;
    if (name == "NL_BB" || name == "nl_bb") return Protocol::nl_bb;
    fail(ErrorCode::parse_error, "unknown protocol '" + name + "'");
}

namespace {

bool unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

void require_unit_curve(const Curve& c, const char* what) {
    for (double v : c)
        if (!unit(v)) fail(ErrorCode::config_invalid, std::string(what) + " outside [0,1]");
}

}  // namespace

void validate_report(const MetricsReport& r) {
    if (r.sequences < 1) fail(ErrorCode::config_invalid, "report covers no sequences");
    if (r.failures < 0 || r.failures > r.sequences)
        fail(ErrorCode::config_invalid, "failure count outside [0, sequences]");
    if (static_cast<int>(r.per_sequence.size()) != r.sequences)
        fail(ErrorCode::config_invalid, "per-sequence list does not match sequence count");
    require_unit_curve(r.success, "success curve value");
    require_unit_curve(r.precision_points, "precision curve value");
    if (!unit(r.auc) || !unit(r.precision) || !unit(r.grounding_acc))
        fail(ErrorCode::config_invalid, "aggregate metric outside [0,1]");
    if (r.auc != auc_of(r.success))
        fail(ErrorCode::config_invalid, "AUC does not equal the success-curve mean");
    for (const SequenceScore& sc : r.per_sequence) {
        if (!unit(sc.auc) || !unit(sc.precision) || !unit(sc.ground_iou))
            fail(ErrorCode::config_invalid, "per-sequence metric outside [0,1]");
        if (sc.auc != auc_of(sc.curve))
            fail(ErrorCode::config_invalid, "per-sequence AUC does not equal its curve mean");
    }
}

SequenceScore score_sequence(const model::JointModel& m, const synth::SequenceSample& s,
                             Protocol p, int index, double threshold_px) {
    SequenceScore sc;
    sc.id = std::to_string(index) + ":" + std::to_string(s.seed);
    try {
        const int frames = static_cast<int>(s.frames.size());
        if (frames < 2) fail(ErrorCode::config_invalid, "sequence has fewer than two frames");
        if (static_cast<int>(s.gt.size()) != frames)
            fail(ErrorCode::shape_error, "truth list does not match frame count");
        const int frame_px = m.config().frame_size;

        pipeline::GroundingOutcome g = pipeline::ground(m, s.tokens, s.frames[0]);
        // A collapsed grounding box earns zero overlap rather than an error;
        // whether the sequence can continue is the initializer's call.
        if (!s.gt[0].out_of_view && pipeline::box_valid(g.box))
            sc.ground_iou = pipeline::iou(g.box, s.gt[0].box);

        std::optional<pipeline::Box> given;
        if (p == Protocol::nl_bb) {
            if (s.gt[0].out_of_view)
                fail(ErrorCode::degenerate_box,
                     "first-frame truth is out of view, no box to initialize from");
            given = s.gt[0].box;
        }
        pipeline::TrackerState st = pipeline::init_state(m, s.tokens, s.frames[0], given);

        sc.ious.reserve(frames - 1);
        sc.center_err_px.reserve(frames - 1);
        for (int t = 1; t < frames; ++t) {
            pipeline::FrameOutcome out = pipeline::track_frame(m, st, s.frames[t]);
            if (s.gt[t].out_of_view) {
                // The tracker always reports a box, so an absent target can
                // only score zero overlap and unbounded center error.
                sc.ious.push_back(0.0);
                sc.center_err_px.push_back(std::numeric_limits<double>::infinity());
            } else {
                sc.ious.push_back(pipeline::iou(out.box, s.gt[t].box));
                sc.center_err_px.push_back(center_error_px(out.box, s.gt[t].box, frame_px));
            }
        }
        sc.curve = success_curve(sc.ious);
        sc.auc = auc_of(sc.curve);
        sc.precision = precision_within(sc.center_err_px, threshold_px, frame_px);
    } catch (const Error& e) {
        std::string id = std::move(sc.id);
        sc = SequenceScore{};
        sc.id = std::move(id);
        sc.failed = true;
        sc.error = e.one_line();
    }
    return sc;
}

MetricsReport aggregate(std::vector<SequenceScore> scores, Protocol p, int frame_px,
                        double threshold_px) {
    if (scores.empty()) fail(ErrorCode::config_invalid, "nothing to aggregate");
    MetricsReport r;
    r.protocol = p;
    r.frame_px = frame_px;
    r.threshold_px = threshold_px;
    r.sequences = static_cast<int>(scores.size());

    double precision_sum = 0.0;
    int grounded = 0;
    for (const SequenceScore& sc : scores) {
        if (sc.failed) {
            ++r.failures;  // zero curve and scores already count against the mean
        } else {
            if (sc.ground_iou > 0.5) ++grounded;
            Curve pc = precision_curve(sc.center_err_px, threshold_px, frame_px);
            for (int j = 0; j < kSuccessPoints; ++j) r.precision_points[j] += pc[j];
        }
        for (int j = 0; j < kSuccessPoints; ++j) r.success[j] += sc.curve[j];
        precision_sum += sc.precision;
    }
    const double inv = 1.0 / r.sequences;
    for (int j = 0; j < kSuccessPoints; ++j) {
        r.success[j] *= inv;
        r.precision_points[j] *= inv;
    }
    r.auc = auc_of(r.success);
    r.precision = precision_sum * inv;
    r.grounding_acc = grounded * inv;
    r.per_sequence = std::move(scores);
    validate_report(r);
    return r;
}

MetricsReport evaluate(const model::JointModel& m,
                       const std::vector<synth::SequenceSample>& dataset, Protocol p,
                       double threshold_px) {
    if (dataset.empty()) fail(ErrorCode::config_invalid, "evaluation dataset is empty");
    (void)scaled_precision_threshold(threshold_px, m.config().frame_size);  // fail fast
    std::vector<SequenceScore> scores;
    scores.reserve(dataset.size());
    for (int i = 0; i < static_cast<int>(dataset.size()); ++i)
        scores.push_back(score_sequence(m, dataset[i], p, i, threshold_px));
    return aggregate(std::move(scores), p, m.config().frame_size, threshold_px);
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void append_curve(std::string& out, const char* key, const Curve& c) {
    out += key;
    for (double v : c) {
        out += ' ';
        out += num(v);
    }
    out += '\n';
}

}  // namespace

std::string report_text(const MetricsReport& r) {
    std::string out;
    out += std::string("protocol ") + protocol_name(r.protocol) + "\n";
    out += "frame_px " + std::to_string(r.frame_px) + "\n";
    out += "threshold_px " + num(r.threshold_px) + "\n";
    out += "scaled_threshold_px " +
           num(scaled_precision_threshold(r.threshold_px, r.frame_px)) + "\n";
    out += "sequences " + std::to_string(r.sequences) + "\n";
    out += "failures " + std::to_string(r.failures) + "\n";
    out += "auc " + num(r.auc) + "\n";
    out += "precision " + num(r.precision) + "\n";
    out += "grounding_acc " + num(r.grounding_acc) + "\n";
    append_curve(out, "success_curve", r.success);
    append_curve(out, "precision_curve", r.precision_points);
    for (const SequenceScore& sc : r.per_sequence) {
        if (sc.failed) {
            out += "seq " + sc.id + " FAILED " + sc.error + "\n";
        } else {
            out += "seq " + sc.id + " auc " + num(sc.auc) + " precision " +
                   num(sc.precision) + " ground_iou " + num(sc.ground_iou) + "\n";
        }
    }
    return out;
}

std::string report_json(const MetricsReport& r) {
    nlohmann::json j;
    j["protocol"] = protocol_name(r.protocol);
    j["frame_px"] = r.frame_px;
    j["threshold_px"] = r.threshold_px;
    j["scaled_threshold_px"] = scaled_precision_threshold(r.threshold_px, r.frame_px);
    j["sequences"] = r.sequences;
    j["failures"] = r.failures;
    j["auc"] = r.auc;
    j["precision"] = r.precision;
    j["grounding_acc"] = r.grounding_acc;
    j["success_curve"] = std::vector<double>(r.success.begin(), r.success.end());
    j["precision_curve"] =
        std::vector<double>(r.precision_points.begin(), r.precision_points.end());
    nlohmann::json seqs = nlohmann::json::array();
    for (const SequenceScore& sc : r.per_sequence) {
        nlohmann::json e;
        e["id"] = sc.id;
        e["failed"] = sc.failed;
        if (sc.failed) {
            e["error"] = sc.error;
        } else {
            e["auc"] = sc.auc;
            e["precision"] = sc.precision;
            e["ground_iou"] = sc.ground_iou;
        }
        seqs.push_back(std::move(e));
    }
    j["per_sequence"] = std::move(seqs);
    return j.dump(2) + "\n";
}

}  // namespace nltrack::eval
