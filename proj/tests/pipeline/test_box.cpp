#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "nltrack/core/rng.hpp"
#include "nltrack/pipeline/box.hpp"
#include "pipeline_test_util.hpp"

using namespace nltrack;
using namespace nltrack::pipeline;

TEST_CASE("overlap scores hit hand-computed anchors") {
    Box a{0.1, 0.2, 0.6, 0.7};
    CHECK(iou(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(giou(a, a) == doctest::Approx(1.0).epsilon(1e-15));

    // Corner-touching disjoint squares: the hull is the unit square.
    Box p{0.0, 0.0, 0.5, 0.5};
    Box q{0.5, 0.5, 1.0, 1.0};
    CHECK(iou(p, q) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(giou(p, q) == doctest::Approx(-0.5).epsilon(1e-12));

    Box outer{0.0, 0.0, 1.0, 1.0};
    Box inner{0.25, 0.25, 0.75, 0.75};
    CHECK(iou(outer, inner) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(giou(outer, inner) == doctest::Approx(0.25).epsilon(1e-12));

    Box r{0.25, 0.25, 0.75, 0.75};
    CHECK(iou(p, r) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("degenerate input is an error, not a score") {
    Box flat{0.2, 0.2, 0.2, 0.6};
    Box fine{0.1, 0.1, 0.5, 0.5};
    ptu::expect_code([&] { iou(flat, fine); }, ErrorCode::degenerate_box);
    ptu::expect_code([&] { giou(fine, flat); }, ErrorCode::degenerate_box);
    Box nan{0.1, 0.1, std::nan(""), 0.5};
    ptu::expect_code([&] { iou(nan, fine); }, ErrorCode::degenerate_box);
    CHECK(!box_valid(flat));
    CHECK(box_valid(fine));
}

namespace {

// Boxes on a 1/64 grid so intersections, unions and hulls are exact in
// integer units of (1/64)^2.
struct DyadicBox {
    std::int64_t x1, y1, x2, y2;
    Box real() const { return {x1 / 64.0, y1 / 64.0, x2 / 64.0, y2 / 64.0}; }
    std::int64_t area() const { return (x2 - x1) * (y2 - y1); }
};

DyadicBox random_dyadic(Rng& rng) {
    std::int64_t x1 = rng.uniform_int(63);
    std::int64_t y1 = rng.uniform_int(63);
    std::int64_t x2 = x1 + 1 + rng.uniform_int(static_cast<int>(64 - x1 - 1));
    std::int64_t y2 = y1 + 1 + rng.uniform_int(static_cast<int>(64 - y1 - 1));
    return {x1, y1, x2, y2};
}

}  // namespace

TEST_CASE("overlap scores match an exact integer-grid oracle") {
    Rng rng(411);
    for (int it = 0; it < 10000; ++it) {
        DyadicBox a = random_dyadic(rng);
        DyadicBox b = random_dyadic(rng);
        std::int64_t iw = std::max<std::int64_t>(
            0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
        std::int64_t ih = std::max<std::int64_t>(
            0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
        std::int64_t inter = iw * ih;
        std::int64_t uni = a.area() + b.area() - inter;
        std::int64_t hull = (std::max(a.x2, b.x2) - std::min(a.x1, b.x1)) *
                            (std::max(a.y2, b.y2) - std::min(a.y1, b.y1));
        double want_iou = static_cast<double>(inter) / static_cast<double>(uni);
        double want_giou = want_iou - static_cast<double>(hull - uni) /
                                          static_cast<double>(hull);
        Box ra = a.real(), rb = b.real();
        CHECK(iou(ra, rb) == doctest::Approx(want_iou).epsilon(1e-12));
        CHECK(giou(ra, rb) == doctest::Approx(want_giou).epsilon(1e-12));

        // Structural properties on the same draws.
        CHECK(giou(ra, rb) <= iou(ra, rb) + 1e-12);
        CHECK(iou(ra, rb) == iou(rb, ra));
        CHECK(giou(ra, rb) == giou(rb, ra));
        if (hull == uni) CHECK(giou(ra, rb) == doctest::Approx(want_iou).epsilon(1e-12));
    }
}

TEST_CASE("graph overlap agrees with the scalar version") {
    Rng rng(412);
    for (int it = 0; it < 1000; ++it) {
        Box a = random_dyadic(rng).real();
        Box b = random_dyadic(rng).real();
        ag::Graph g;
        ag::Var va = g.leaf(Tensor::row4(a[0], a[1], a[2], a[3]));
        ag::Var vb = g.leaf(Tensor::row4(b[0], b[1], b[2], b[3]));
        CHECK(giou_var(va, vb).val().d[0] == doctest::Approx(giou(a, b)).epsilon(1e-13));
    }
}

TEST_CASE("loss composes the two terms with the given weights") {
    ag::Graph g;
    Box t{0.2, 0.3, 0.6, 0.8};
    ag::Var gt = g.leaf(Tensor::row4(t[0], t[1], t[2], t[3]));

    // Pure L1: a uniform +0.1 coordinate offset averages to exactly 0.1.
    ag::Var off = g.leaf(Tensor::row4(t[0] + 0.1, t[1] + 0.1, t[2] + 0.1, t[3] + 0.1));
    CHECK(box_loss(off, off, gt, 0.0, 1.0).val().d[0] ==
          doctest::Approx(0.1).epsilon(1e-12));

    // Perfect prediction: both terms vanish.
    ag::Var same = g.leaf(Tensor::row4(t[0], t[1], t[2], t[3]));
    CHECK(box_loss(same, same, gt, 2.0, 5.0).val().d[0] ==
          doctest::Approx(0.0).epsilon(1e-12));

    // The overlap term reads the clamped box, the L1 term the raw one.
    Box raw{0.5, 0.5, 0.4, 0.6};
    Box clamped{0.5, 0.5, 0.5 + 1e-4, 0.6};
    ag::Var vr = g.leaf(Tensor::row4(raw[0], raw[1], raw[2], raw[3]));
    ag::Var vc = g.leaf(Tensor::row4(clamped[0], clamped[1], clamped[2], clamped[3]));
    double want = 2.0 * (1.0 - giou(clamped, t)) +
                  5.0 * 0.25 *
                      (std::abs(raw[0] - t[0]) + std::abs(raw[1] - t[1]) +
                       std::abs(raw[2] - t[2]) + std::abs(raw[3] - t[3]));
    CHECK(box_loss(vr, vc, gt, 2.0, 5.0).val().d[0] ==
          doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("loss gradient matches finite differences") {
    // Coordinates chosen away from min/max and |.| ties, so the loss is
    // smooth in a finite-difference neighborhood.
    Box pred{0.2, 0.3, 0.7, 0.8};
    Box t{0.25, 0.35, 0.65, 0.75};

    auto loss_at = [&](const Box& p) {
        ag::Graph g;
        ag::Var vp = g.leaf(Tensor::row4(p[0], p[1], p[2], p[3]));
        ag::Var gt = g.leaf(Tensor::row4(t[0], t[1], t[2], t[3]));
        return box_loss(vp, vp, gt, 2.0, 5.0).val().d[0];
    };

    ag::Graph g;
    ag::Var vp = g.leaf(Tensor::row4(pred[0], pred[1], pred[2], pred[3]), true);
    ag::Var gt = g.leaf(Tensor::row4(t[0], t[1], t[2], t[3]));
    ag::Var loss = box_loss(vp, vp, gt, 2.0, 5.0);
    g.backward(loss);

    const double h = 1e-6;
    for (int k = 0; k < 4; ++k) {
        Box up = pred, dn = pred;
        up[static_cast<std::size_t>(k)] += h;
        dn[static_cast<std::size_t>(k)] -= h;
        double numeric = (loss_at(up) - loss_at(dn)) / (2 * h);
        double analytic = vp.grad().d[static_cast<std::size_t>(k)];
        CHECK(analytic == doctest::Approx(numeric).epsilon(1e-5));
    }
}
