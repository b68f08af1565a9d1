#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "nltrack/core/rng.hpp"
#include "nltrack/eval/metrics.hpp"
#include "../pipeline/pipeline_test_util.hpp"

using namespace nltrack;
using namespace nltrack::eval;

namespace {

// Independent recount of one curve entry, written as differently as possible
// from the production loop.
double count_above(const std::vector<double>& xs, double tau) {
    int n = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) n += xs[i] > tau ? 1 : 0;
    return double(n) / double(xs.size());
}

}  // namespace

TEST_CASE("success curve counts strictly-above fractions") {
    std::vector<double> perfect(7, 1.0);
    Curve c = success_curve(perfect);
    for (int j = 0; j < 20; ++j) CHECK(c[j] == 1.0);
    CHECK(c[20] == 0.0);  // 1.0 is not strictly above the 1.0 threshold
    CHECK(auc_of(c) == 20.0 / 21.0);

    std::vector<double> half(4, 0.5);
    Curve h = success_curve(half);
    for (int j = 0; j < kSuccessPoints; ++j) CHECK(h[j] == (j < 10 ? 1.0 : 0.0));
    CHECK(auc_of(h) == 10.0 / 21.0);

    ptu::expect_code([] { success_curve({}); }, ErrorCode::config_invalid);
}

TEST_CASE("success curve matches a brute-force recount") {
    Rng rng(404);
    for (int trial = 0; trial < 1000; ++trial) {
        int n = 1 + rng.uniform_int(40);
        std::vector<double> ious(n);
        for (double& v : ious) {
            // Mix exact threshold multiples in so ties exercise strictness.
            v = rng.uniform() < 0.3 ? rng.uniform_int(21) * 0.05 : rng.uniform();
        }
        Curve c = success_curve(ious);
        for (int j = 0; j < kSuccessPoints; ++j) CHECK(c[j] == count_above(ious, j * 0.05));
    }
}

TEST_CASE("precision threshold scales with the frame size") {
    CHECK(scaled_precision_threshold(20.0, 320) == 20.0);
    CHECK(scaled_precision_threshold(20.0, 80) == 5.0);
    CHECK(scaled_precision_threshold(20.0, 32) == 2.0);
    ptu::expect_code([] { scaled_precision_threshold(0.0, 80); }, ErrorCode::config_invalid);
    ptu::expect_code([] { scaled_precision_threshold(20.0, 0); }, ErrorCode::config_invalid);
}

TEST_CASE("center error and inclusive precision") {
    pipeline::Box gt{0.2, 0.2, 0.4, 0.4};
    CHECK(center_error_px(gt, gt, 80) == 0.0);

    // A 0.0625 shift at 80 px is exactly 5 px, exactly the 20 px threshold
    // scaled to this frame; the inclusive comparison must count it.
    pipeline::Box at{0.2625, 0.2, 0.4625, 0.4};
    CHECK(center_error_px(at, gt, 80) == 5.0);
    CHECK(precision_within({5.0}, 20.0, 80) == 1.0);
    CHECK(precision_within({std::nextafter(5.0, 6.0)}, 20.0, 80) == 0.0);
    CHECK(precision({at}, {gt}, 20.0, 80) == 1.0);

    // Out-of-view frames carry infinite error and never count as within.
    std::vector<double> err{0.0, std::numeric_limits<double>::infinity()};
    CHECK(precision_within(err, 20.0, 80) == 0.5);

    ptu::expect_code([] { precision_within({}, 20.0, 80); }, ErrorCode::config_invalid);
    ptu::expect_code([&] { precision({at}, {gt, gt}, 20.0, 80); }, ErrorCode::shape_error);
}

TEST_CASE("precision matches a brute-force recount") {
    Rng rng(405);
    for (int trial = 0; trial < 300; ++trial) {
        int n = 1 + rng.uniform_int(30);
        std::vector<pipeline::Box> pred(n), gt(n);
        for (int i = 0; i < n; ++i) {
            double cx = rng.uniform(0.2, 0.8), cy = rng.uniform(0.2, 0.8);
            double s = rng.uniform(0.05, 0.15);
            gt[i] = {cx - s, cy - s, cx + s, cy + s};
            double dx = rng.uniform(-0.1, 0.1), dy = rng.uniform(-0.1, 0.1);
            pred[i] = {gt[i][0] + dx, gt[i][1] + dy, gt[i][2] + dx, gt[i][3] + dy};
        }
        double got = precision(pred, gt, 20.0, 80);
        int hits = 0;
        for (int i = 0; i < n; ++i) {
            double dx = 80.0 * ((pred[i][0] + pred[i][2]) - (gt[i][0] + gt[i][2])) / 2.0;
            double dy = 80.0 * ((pred[i][1] + pred[i][3]) - (gt[i][1] + gt[i][3])) / 2.0;
            if (std::hypot(dx, dy) <= 5.0) ++hits;
        }
        CHECK(got == double(hits) / n);
    }
}

TEST_CASE("precision curve sweeps thresholds and pins the headline at entry 10") {
    std::vector<double> err{0.0, 1.0, 2.0, 4.0, 7.0};
    Curve c = precision_curve(err, 20.0, 80);  // scaled threshold 5 px
    CHECK(c[0] == 0.2);   // only the exact-zero error sits within 0 px
    CHECK(c[2] == 0.4);   // <= 1 px
    CHECK(c[10] == 0.8);  // <= 5 px, the headline operating point
    CHECK(c[10] == precision_within(err, 20.0, 80));
    CHECK(c[20] == 1.0);  // <= 10 px
    for (int j = 1; j < kSuccessPoints; ++j) CHECK(c[j] >= c[j - 1]);
    ptu::expect_code([] { precision_curve({}, 20.0, 80); }, ErrorCode::config_invalid);
}

TEST_CASE("grounding accuracy requires overlap strictly above a half") {
    pipeline::Box unit{0.0, 0.0, 1.0, 1.0};
    pipeline::Box half{0.0, 0.0, 0.5, 1.0};  // IoU exactly 0.5 against the unit box
    pipeline::Box close{0.0, 0.0, 0.9, 1.0};
    pipeline::Box far{0.0, 0.0, 0.2, 0.2};

    CHECK(grounding_accuracy({close, unit}, {unit, unit}) == 1.0);
    CHECK(grounding_accuracy({half}, {unit}) == 0.0);
    CHECK(grounding_accuracy({close, half, far, unit}, {unit, unit, unit, unit}) == 0.5);

    ptu::expect_code([&] { grounding_accuracy({unit}, {unit, unit}); },
                     ErrorCode::shape_error);
    ptu::expect_code([] { grounding_accuracy({}, {}); }, ErrorCode::config_invalid);
}
