#include <doctest.h>

#include <cmath>

#include "nltrack/core/rng.hpp"
#include "nltrack/pipeline/crop.hpp"
#include "nltrack/synth/world.hpp"
#include "pipeline_test_util.hpp"

using namespace nltrack;
using namespace nltrack::pipeline;

TEST_CASE("box transfer between frame and crop coordinates round-trips") {
    Rng rng(520);
    double worst = 0.0;
    for (int it = 0; it < 10000; ++it) {
        CropParams p;
        p.cx = rng.uniform(0.1, 0.9);
        p.cy = rng.uniform(0.1, 0.9);
        p.side = rng.uniform(0.05, 1.0);
        p.out_size = 32;
        double x1 = rng.uniform(0.0, 0.9), y1 = rng.uniform(0.0, 0.9);
        Box b{x1, y1, x1 + rng.uniform(0.01, 0.1), y1 + rng.uniform(0.01, 0.1)};
        Box fwd = map_box_to_frame(map_box_to_crop(b, p), p);
        Box bwd = map_box_to_crop(map_box_to_frame(b, p), p);
        for (int k = 0; k < 4; ++k) {
            worst = std::max(worst, std::abs(fwd[static_cast<std::size_t>(k)] -
                                             b[static_cast<std::size_t>(k)]));
            worst = std::max(worst, std::abs(bwd[static_cast<std::size_t>(k)] -
                                             b[static_cast<std::size_t>(k)]));
        }
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("window side follows the context factor and clamps at the frame") {
    // sqrt(0.2 * 0.2) = 0.2, doubled: a 0.4 window centered on the box.
    CropParams p = centered_crop({0.4, 0.4, 0.6, 0.6}, 2.0, 32);
    CHECK(p.cx == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p.cy == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p.side == doctest::Approx(0.4).epsilon(1e-12));

    // A square target under factor 2 always spans the middle half of its crop.
    Box in_crop = map_box_to_crop({0.4, 0.4, 0.6, 0.6}, p);
    CHECK(in_crop[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(in_crop[1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(in_crop[2] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(in_crop[3] == doctest::Approx(0.75).epsilon(1e-12));

    // Large target: the window cannot outgrow the frame.
    CHECK(centered_crop({0.1, 0.1, 0.9, 0.9}, 4.0, 32).side == 1.0);

    ptu::expect_code([] { centered_crop({0.5, 0.5, 0.5, 0.7}, 2.0, 32); },
                     ErrorCode::degenerate_box);
    ptu::expect_code([] { centered_crop({0.4, 0.4, 0.6, 0.6}, 2.0, 0); },
                     ErrorCode::config_invalid);
}

TEST_CASE("full-frame window at native resolution copies the frame bit for bit") {
    Rng rng(521);
    Image frame(3, 32, 32);
    for (float& v : frame.px) v = static_cast<float>(rng.uniform());
    CropParams p{0.5, 0.5, 1.0, 32};
    Image out = resample_crop(frame, p);
    CHECK(bit_equal(out, frame));
}

TEST_CASE("samples outside the frame read zero, not the border") {
    // Window [-0.25, 0.25]^2 over an all-ones frame: sample j lands exactly on
    // source column j-10, so the out-of-frame band is crisp.
    Image frame(3, 40, 40);
    for (float& v : frame.px) v = 1.0f;
    CropParams p{0.0, 0.0, 0.5, 20};
    Image out = resample_crop(frame, p);
    int zeros = 0, ones = 0;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            float v = out.at(0, i, j);
            if (i < 10 || j < 10) {
                CHECK(v == 0.0f);
                ++zeros;
            } else {
                CHECK(v == 1.0f);
                ++ones;
            }
        }
    CHECK(zeros == 300);
    CHECK(ones == 100);
}

TEST_CASE("interior samples interpolate bilinearly") {
    // A bilinear resampler reproduces a linear ramp exactly wherever all four
    // taps are in-frame.
    Image frame(1, 4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) frame.at(0, y, x) = static_cast<float>((x + 10 * y) / 100.0);
    CropParams p{0.5, 0.5, 0.5, 8};
    Image out = resample_crop(frame, p);
    for (int i = 0; i < 8; ++i) {
        double fy = (0.25 + (i + 0.5) / 8.0 * 0.5) * 4.0 - 0.5;
        for (int j = 0; j < 8; ++j) {
            double fx = (0.25 + (j + 0.5) / 8.0 * 0.5) * 4.0 - 0.5;
            CHECK(out.at(0, i, j) ==
                  doctest::Approx((fx + 10 * fy) / 100.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("search window around the previous truth contains the next truth") {
    // Motion-budget property of the default world: per-frame drift plus
    // rotation wobble never escapes a 4x context window. Occluders are off
    // because partial cover shrinks the truth to the visible sliver, which
    // deliberately breaks the premise.
    synth::WorldConfig world;
    world.occluder_prob = 0.0;
    int pairs = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        synth::Episode ep = synth::build_episode(world, seed);
        for (int t = 1; t < world.num_frames; ++t) {
            synth::GtBox prev = synth::gt_box(ep, t - 1);
            synth::GtBox cur = synth::gt_box(ep, t);
            if (prev.out_of_view || cur.out_of_view) continue;
            CropParams p = centered_crop(prev.box, kSearchContext, 80);
            Box mapped = map_box_to_crop(cur.box, p);
            CHECK(ptu::in_unit(mapped));
            CHECK(box_valid(mapped));
            ++pairs;
        }
    }
    CHECK(pairs > 300);
}
