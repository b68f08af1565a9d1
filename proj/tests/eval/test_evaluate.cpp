#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "nltrack/eval/evaluate.hpp"
#include "nltrack/synth/world.hpp"
#include "../pipeline/pipeline_test_util.hpp"

using namespace nltrack;
using namespace nltrack::eval;

namespace {

SequenceScore perfect_score(std::string id) {
    SequenceScore sc;
    sc.id = std::move(id);
    sc.ground_iou = 1.0;
    sc.ious.assign(5, 1.0);
    sc.center_err_px.assign(5, 0.0);
    sc.curve = success_curve(sc.ious);
    sc.auc = auc_of(sc.curve);
    sc.precision = precision_within(sc.center_err_px, 20.0, 80);
    return sc;
}

SequenceScore failed_score(std::string id) {
    SequenceScore sc;
    sc.id = std::move(id);
    sc.failed = true;
    sc.error = "error: init_failed: synthetic failure";
    return sc;
}

std::vector<synth::SequenceSample> tiny_dataset(int n, std::uint64_t base) {
    std::vector<synth::SequenceSample> out;
    for (int i = 0; i < n; ++i)
        out.push_back(synth::generate_sequence(ptu::tiny_world(), base + i));
    return out;
}

// Constant corner logits collapse every prediction to a zero-area point.
void collapse_head(ParamStore& s) {
    for (const char* branch : {"head.tl", "head.br"})
        for (const char* leaf : {".c3.w", ".c3.b"}) {
            int i = s.index_of(std::string(branch) + leaf);
            REQUIRE(i >= 0);
            s.entry(i).value.fill(0.0);
        }
}

}  // namespace

TEST_CASE("protocol names round-trip and reject garbage") {
    CHECK(std::string(protocol_name(Protocol::nl_only)) == "NL_ONLY");
    CHECK(std::string(protocol_name(Protocol::nl_bb)) == "NL_BB");
    CHECK(protocol_from_name("NL_ONLY") == Protocol::nl_only);
    CHECK(protocol_from_name("nl_bb") == Protocol::nl_bb);
    ptu::expect_code([] { protocol_from_name("BB_ONLY"); }, ErrorCode::parse_error);
}

TEST_CASE("aggregating perfect sequences pins every headline metric") {
    std::vector<SequenceScore> scores;
    for (int i = 0; i < 4; ++i) scores.push_back(perfect_score(std::to_string(i) + ":9"));
    MetricsReport r = aggregate(std::move(scores), Protocol::nl_bb, 80, 20.0);

    // An always-correct tracker still misses the strict 1.0 threshold entry.
    CHECK(r.auc == 20.0 / 21.0);
    CHECK(r.precision == 1.0);
    CHECK(r.grounding_acc == 1.0);
    CHECK(r.failures == 0);
    CHECK(r.sequences == 4);
    for (int j = 0; j < 20; ++j) CHECK(r.success[j] == 1.0);
    CHECK(r.success[20] == 0.0);
    CHECK(r.precision_points[10] == r.precision);
}

TEST_CASE("a failed sequence drags every aggregate down") {
    std::vector<SequenceScore> scores;
    for (int i = 0; i < 3; ++i) scores.push_back(perfect_score(std::to_string(i) + ":9"));
    scores.push_back(failed_score("3:9"));
    MetricsReport r = aggregate(std::move(scores), Protocol::nl_only, 80, 20.0);

    CHECK(r.failures == 1);
    CHECK(r.auc == 15.0 / 21.0);
    CHECK(r.precision == 0.75);
    CHECK(r.grounding_acc == 0.75);
    CHECK(r.precision_points[10] == 0.75);
    CHECK(r.per_sequence[3].failed);
    CHECK(r.per_sequence[3].auc == 0.0);

    ptu::expect_code([] { aggregate({}, Protocol::nl_only, 80, 20.0); },
                     ErrorCode::config_invalid);
}

TEST_CASE("report validation rejects tampered invariants") {
    std::vector<SequenceScore> scores{perfect_score("0:1"), perfect_score("1:2")};
    MetricsReport r = aggregate(std::move(scores), Protocol::nl_bb, 80, 20.0);
    validate_report(r);  // freshly aggregated reports pass

    MetricsReport bad = r;
    bad.auc += 0.01;
    ptu::expect_code([&] { validate_report(bad); }, ErrorCode::config_invalid);

    bad = r;
    bad.success[3] = 1.25;
    ptu::expect_code([&] { validate_report(bad); }, ErrorCode::config_invalid);

    bad = r;
    bad.failures = 3;
    ptu::expect_code([&] { validate_report(bad); }, ErrorCode::config_invalid);

    bad = r;
    bad.per_sequence.pop_back();
    ptu::expect_code([&] { validate_report(bad); }, ErrorCode::config_invalid);

    bad = r;
    bad.per_sequence[0].auc = 0.123;
    ptu::expect_code([&] { validate_report(bad); }, ErrorCode::config_invalid);
}

TEST_CASE("box-initialized evaluation runs every sequence and repeats bit-identically") {
    model::JointModel m(ptu::tiny_model(), 7);
    std::vector<synth::SequenceSample> ds = tiny_dataset(3, 100);

    MetricsReport a = evaluate(m, ds, Protocol::nl_bb);
    MetricsReport b = evaluate(m, ds, Protocol::nl_bb);

    CHECK(a.sequences == 3);
    CHECK(a.failures == 0);  // a given box cannot fail initialization
    CHECK(a.frame_px == 32);
    CHECK(a.per_sequence[0].id == "0:100");
    CHECK(a.per_sequence[2].id == "2:102");
    CHECK(a.per_sequence[0].ious.size() == 7);  // frames 1..7 are tracked
    CHECK(report_text(a) == report_text(b));
    CHECK(report_json(a) == report_json(b));

    // The batch path and a lone per-sequence scoring agree bit for bit.
    SequenceScore lone = score_sequence(m, ds[1], Protocol::nl_bb, 1, 20.0);
    CHECK(lone.auc == a.per_sequence[1].auc);
    CHECK(lone.precision == a.per_sequence[1].precision);
    CHECK(lone.ious == a.per_sequence[1].ious);

    ptu::expect_code([&] { evaluate(m, {}, Protocol::nl_bb); }, ErrorCode::config_invalid);
    ptu::expect_code([&] { evaluate(m, ds, Protocol::nl_bb, 0.0); },
                     ErrorCode::config_invalid);
}

TEST_CASE("language-only evaluation grounds the first frame itself") {
    model::JointModel m(ptu::tiny_model(), 7);
    std::vector<synth::SequenceSample> ds = tiny_dataset(3, 200);

    MetricsReport a = evaluate(m, ds, Protocol::nl_only);
    MetricsReport b = evaluate(m, ds, Protocol::nl_only);
    CHECK(report_json(a) == report_json(b));
    CHECK(a.sequences == 3);
    for (const SequenceScore& sc : a.per_sequence) {
        if (sc.failed) continue;  // an untrained grounding may collapse; that is a result
        CHECK(sc.ground_iou >= 0.0);
        CHECK(sc.ground_iou <= 1.0);
        CHECK(sc.ious.size() == 7);
    }
}

TEST_CASE("out-of-view truth scores zero overlap and infinite center error") {
    model::JointModel m(ptu::tiny_model(), 7);
    synth::SequenceSample s = synth::generate_sequence(ptu::tiny_world(), 300);
    s.gt[3].out_of_view = true;

    SequenceScore sc = score_sequence(m, s, Protocol::nl_bb, 0, 20.0);
    REQUIRE(!sc.failed);
    CHECK(sc.ious[2] == 0.0);
    CHECK(std::isinf(sc.center_err_px[2]));
    CHECK(std::isfinite(sc.center_err_px[1]));

    // Without a visible first frame the box protocol has nothing to start from.
    s.gt[0].out_of_view = true;
    SequenceScore dead = score_sequence(m, s, Protocol::nl_bb, 0, 20.0);
    CHECK(dead.failed);
    CHECK(dead.error.find("degenerate_box") != std::string::npos);
}

TEST_CASE("a collapsed model fails language-only sequences without aborting the run") {
    model::JointModel m(ptu::tiny_model(), 7);
    collapse_head(m.store());
    std::vector<synth::SequenceSample> ds = tiny_dataset(3, 400);

    MetricsReport r = evaluate(m, ds, Protocol::nl_only);
    CHECK(r.failures == 3);
    CHECK(r.auc == 0.0);
    CHECK(r.precision == 0.0);
    CHECK(r.grounding_acc == 0.0);
    for (const SequenceScore& sc : r.per_sequence) {
        CHECK(sc.failed);
        CHECK(sc.error.find("init_failed") != std::string::npos);
    }

    // With a given box the same model initializes, freezes on that box and
    // scores honestly instead of failing.
    MetricsReport bb = evaluate(m, ds, Protocol::nl_bb);
    CHECK(bb.failures == 0);
    CHECK(bb.auc >= 0.0);
}

TEST_CASE("reports serialize as line records and as JSON") {
    std::vector<SequenceScore> scores{perfect_score("0:5"), failed_score("1:6")};
    MetricsReport r = aggregate(std::move(scores), Protocol::nl_only, 80, 20.0);

    std::string text = report_text(r);
    CHECK(text.find("protocol NL_ONLY\n") != std::string::npos);
    CHECK(text.find("frame_px 80\n") != std::string::npos);
    CHECK(text.find("scaled_threshold_px 5.000000\n") != std::string::npos);
    CHECK(text.find("failures 1\n") != std::string::npos);
    CHECK(text.find("success_curve 0.500000") != std::string::npos);
    CHECK(text.find("seq 0:5 auc ") != std::string::npos);
    CHECK(text.find("seq 1:6 FAILED error: init_failed") != std::string::npos);

    nlohmann::json j = nlohmann::json::parse(report_json(r));
    CHECK(j["protocol"] == "NL_ONLY");
    CHECK(j["sequences"] == 2);
    CHECK(j["failures"] == 1);
    CHECK(j["auc"].get<double>() == r.auc);
    CHECK(j["success_curve"].size() == 21);
    CHECK(j["precision_curve"].size() == 21);
    REQUIRE(j["per_sequence"].size() == 2);
    CHECK(j["per_sequence"][0]["id"] == "0:5");
    CHECK(j["per_sequence"][0]["failed"] == false);
    CHECK(j["per_sequence"][1]["failed"] == true);
    CHECK(j["per_sequence"][1]["error"].get<std::string>().find("init_failed") !=
          std::string::npos);
}
