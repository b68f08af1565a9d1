#include "nltrack/synth/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "nltrack/common.hpp"

namespace nltrack::synth {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kPatch = 8;              // vision patch size the model consumes
constexpr float kBackground = 0.12f;
constexpr float kOccluderGray = 0.45f;
constexpr double kInitialTiltDeg = 15.0;

const char* kColorNames[kColorCount] = {"red", "green", "blue", "yellow", "purple", "orange"};
const char* kShapeNames[kShapeCount] = {"square", "circle", "triangle"};
const std::array<float, 3> kColorRgb[kColorCount] = {
    {0.85f, 0.10f, 0.10f}, {0.10f, 0.70f, 0.15f}, {0.15f, 0.25f, 0.85f},
    {0.90f, 0.85f, 0.10f}, {0.60f, 0.15f, 0.75f}, {0.95f, 0.55f, 0.10f},
};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Point-in-shape test against the pixel center, in object-local coordinates.
bool inside_shape(Shape shape, double half, double angle, double lx, double ly) {
    const double ca = std::cos(-angle), sa = std::sin(-angle);
    const double x = lx * ca - ly * sa;
    const double y = lx * sa + ly * ca;
    switch (shape) {
        case Shape::square:
            return std::max(std::fabs(x), std::fabs(y)) <= half;
        case Shape::circle:
            return x * x + y * y <= half * half;
        case Shape::triangle: {
            // Equilateral triangle of circumradius half, one vertex pointing
            // up (negative y) at angle 0; inside = consistent side of each edge.
            double vx[3], vy[3];
            for (int k = 0; k < 3; ++k) {
                const double a = -kPi / 2 + 2.0 * kPi * k / 3.0;
                vx[k] = half * std::cos(a);
                vy[k] = half * std::sin(a);
            }
            bool pos = false, neg = false;
            for (int k = 0; k < 3; ++k) {
                const int j = (k + 1) % 3;
                const double cross =
                    (vx[j] - vx[k]) * (y - vy[k]) - (vy[j] - vy[k]) * (x - vx[k]);
                if (cross > 0) pos = true;
                if (cross < 0) neg = true;
            }
            return !(pos && neg);
        }
    }
    return false;
}

double cover_radius(Shape shape, double half) {
    return shape == Shape::square ? half * 1.4142135623730951 : half;
}

void step_bounce(double& c, double& v, double half, double size) {
    c += v;
    if (c < half) {
        c = 2.0 * half - c;
        v = -v;
    }
    if (c > size - half) {
        c = 2.0 * (size - half) - c;
        v = -v;
    }
}

Rng noise_stream(std::uint64_t seed, int t) {
    return Rng(splitmix64(splitmix64(seed ^ 0x6e6f697365ull) + static_cast<std::uint64_t>(t)));
}

std::vector<ObjectFacts> frame0_facts(const Episode& ep) {
    std::vector<ObjectFacts> facts;
    facts.reserve(ep.objects.size());
    for (const ObjectTrack& o : ep.objects)
        facts.push_back({static_cast<int>(o.color), static_cast<int>(o.shape), o.poses[0].cx,
                         o.poses[0].cy, o.vx0, o.vy0});
    return facts;
}

}  // namespace

const char* color_name(Color c) { return kColorNames[static_cast<int>(c)]; }
const char* shape_name(Shape s) { return kShapeNames[static_cast<int>(s)]; }
std::array<float, 3> color_rgb(Color c) { return kColorRgb[static_cast<int>(c)]; }

std::string WorldConfig::canonical_text() const {
    std::string colors, shapes;
    for (Color c : color_set) {
        if (!colors.empty()) colors += ',';
        colors += color_name(c);
    }
    for (Shape s : shape_set) {
        if (!shapes.empty()) shapes += ',';
        shapes += shape_name(s);
    }
    const char* motion_name =
        motion == Motion::linear ? "linear" : motion == Motion::bounce ? "bounce" : "random-walk";
    std::string out;
    out += "ambiguous_demo=" + std::string(ambiguous_demo ? "1" : "0") + "\n";
    out += "color_set=" + colors + "\n";
    out += "frame_size=" + std::to_string(frame_size) + "\n";
    out += "half_max=" + fmt_double(half_max) + "\n";
    out += "half_min=" + fmt_double(half_min) + "\n";
    out += "motion=" + std::string(motion_name) + "\n";
    out += "noise_sigma=" + fmt_double(noise_sigma) + "\n";
    out += "num_frames=" + std::to_string(num_frames) + "\n";
    out += "num_objects=" + std::to_string(num_objects) + "\n";
    out += "occluder_prob=" + fmt_double(occluder_prob) + "\n";
    out += "rotation_max_deg=" + fmt_double(rotation_max_deg) + "\n";
    out += "shape_set=" + shapes + "\n";
    out += "speed_max=" + fmt_double(speed_max) + "\n";
    out += "speed_min=" + fmt_double(speed_min) + "\n";
    out += "twin_prob=" + fmt_double(twin_prob) + "\n";
    return out;
}

std::uint64_t WorldConfig::hash() const { return fnv1a64(canonical_text()); }

void validate(const WorldConfig& cfg) {
    if (cfg.frame_size <= 0 || cfg.frame_size % kPatch != 0)
        fail(ErrorCode::config_invalid,
             "frame_size must be a positive multiple of " + std::to_string(kPatch));
    if (cfg.num_frames < 1) fail(ErrorCode::config_invalid, "num_frames must be >= 1");
    if (cfg.num_objects < 2 || cfg.num_objects > 6)
        fail(ErrorCode::config_invalid, "num_objects must be in [2,6]");
    if (cfg.shape_set.empty() || cfg.color_set.empty())
        fail(ErrorCode::config_invalid, "shape_set and color_set must be non-empty");
    if (std::set<Shape>(cfg.shape_set.begin(), cfg.shape_set.end()).size() != cfg.shape_set.size())
        fail(ErrorCode::config_invalid, "shape_set has duplicates");
    if (std::set<Color>(cfg.color_set.begin(), cfg.color_set.end()).size() != cfg.color_set.size())
        fail(ErrorCode::config_invalid, "color_set has duplicates");
    for (double p : {cfg.occluder_prob, cfg.twin_prob})
        if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::config_invalid, "probability outside [0,1]");
    if (!(cfg.half_min >= 2.0 && cfg.half_min <= cfg.half_max) ||
        cfg.half_max > cfg.frame_size / 4.0)
        fail(ErrorCode::config_invalid, "object half-extent range invalid for this frame size");
    if (!(cfg.speed_min >= 0.0 && cfg.speed_min <= cfg.speed_max))
        fail(ErrorCode::config_invalid, "speed range invalid");
    if (cfg.noise_sigma < 0.0 || cfg.rotation_max_deg < 0.0)
        fail(ErrorCode::config_invalid, "noise and rotation bounds must be non-negative");

    // Distinct (color, shape) pairs are what keeps descriptions well-posed;
    // the ambiguity demo deliberately reuses the target's pair once.
    const int space = static_cast<int>(cfg.shape_set.size() * cfg.color_set.size());
    const int required = cfg.num_objects - (cfg.ambiguous_demo ? 1 : 0);
    if (required > space)
        fail(ErrorCode::uniqueness_unsatisfiable,
             std::to_string(cfg.num_objects) + " objects need more distinct color/shape pairs " +
                 "than the " + std::to_string(space) + " available");
}

Episode build_episode(const WorldConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    Rng rng(splitmix64(seed));
    const double W = cfg.frame_size;

    Episode ep;
    ep.cfg = cfg;
    ep.seed = seed;

    // Attribute assignment: shuffle the (color, shape) cross product.
    std::vector<std::pair<Color, Shape>> pairs;
    for (Color c : cfg.color_set)
        for (Shape s : cfg.shape_set) pairs.emplace_back(c, s);
    for (int i = static_cast<int>(pairs.size()) - 1; i > 0; --i)
        std::swap(pairs[static_cast<std::size_t>(i)],
                  pairs[static_cast<std::size_t>(rng.uniform_int(i + 1))]);

    ep.target_id = rng.uniform_int(cfg.num_objects);
    const bool twin =
        cfg.ambiguous_demo || (cfg.twin_prob > 0.0 && rng.uniform() < cfg.twin_prob);
    const int twin_id = twin ? (ep.target_id + 1) % cfg.num_objects : -1;

    ep.objects.resize(static_cast<std::size_t>(cfg.num_objects));
    int next_pair = 0;
    for (int i = 0; i < cfg.num_objects; ++i) {
        ObjectTrack& o = ep.objects[static_cast<std::size_t>(i)];
        // The twin's attributes are overwritten with the target's below, so
        // it must not consume a distinct pair (the demo world may only have
        // num_objects - 1 of them).
        const std::size_t pick =
            (twin && i == twin_id) ? 0 : static_cast<std::size_t>(next_pair++);
        o.color = pairs[pick].first;
        o.shape = pairs[pick].second;
        o.half = rng.uniform(cfg.half_min, cfg.half_max);
        const double cx = rng.uniform(o.half, W - o.half);
        const double cy = rng.uniform(o.half, W - o.half);
        const double speed = rng.uniform(cfg.speed_min, cfg.speed_max);
        const double heading = rng.uniform(0.0, 2.0 * kPi);
        o.vx0 = speed * std::cos(heading);
        o.vy0 = speed * std::sin(heading);
        const double tilt = kInitialTiltDeg * kPi / 180.0;
        const double rot = cfg.rotation_max_deg * kPi / 180.0;
        o.poses.reserve(static_cast<std::size_t>(cfg.num_frames));
        o.poses.push_back({cx, cy, rng.uniform(-tilt, tilt)});
        o.omega = rng.uniform(-rot, rot);
    }

    if (twin) {
        ObjectTrack& tw = ep.objects[static_cast<std::size_t>(twin_id)];
        const ObjectTrack& tg = ep.objects[static_cast<std::size_t>(ep.target_id)];
        tw.color = tg.color;
        tw.shape = tg.shape;
        // Same heading class as the target so the description falls through
        // to a spatial clause a single frame can verify.
        tw.vx0 = tg.vx0;
        tw.vy0 = tg.vy0;
        if (!cfg.ambiguous_demo) {
            const double mid = W / 2.0;
            double lo, hi;
            if (tg.poses[0].cx < mid) {
                lo = mid + tw.half;
                hi = W - tw.half;
            } else {
                lo = tw.half;
                hi = mid - tw.half;
            }
            if (hi < lo) hi = lo;
            tw.poses[0].cx = rng.uniform(lo, hi);
        }
    }

    // Occluder: aimed to cross the target's path mid-episode.
    if (cfg.occluder_prob > 0.0 && rng.uniform() < cfg.occluder_prob) {
        OccluderTrack occ;
        occ.hw = rng.uniform(8.0, 14.0);
        occ.hh = rng.uniform(8.0, 14.0);
        const double speed = rng.uniform(2.0, 4.0);
        const double heading = rng.uniform(0.0, 2.0 * kPi);
        occ.poses.push_back({0.0, 0.0, 0.0});
        occ.poses[0].cx = speed * std::cos(heading);  // velocity, relocated below
        occ.poses[0].cy = speed * std::sin(heading);
        ep.occluder = occ;
    }

    // Simulate object motion.
    for (std::size_t i = 0; i < ep.objects.size(); ++i) {
        ObjectTrack& o = ep.objects[i];
        double cx = o.poses[0].cx, cy = o.poses[0].cy, angle = o.poses[0].angle;
        double vx = o.vx0, vy = o.vy0;
        for (int t = 1; t < cfg.num_frames; ++t) {
            switch (cfg.motion) {
                case Motion::linear:
                    cx += vx;
                    cy += vy;
                    break;
                case Motion::bounce:
                    step_bounce(cx, vx, o.half, W);
                    step_bounce(cy, vy, o.half, W);
                    break;
                case Motion::random_walk: {
                    vx += rng.normal(0.0, 0.3);
                    vy += rng.normal(0.0, 0.3);
                    const double sp = std::hypot(vx, vy);
                    if (sp > cfg.speed_max) {
                        vx *= cfg.speed_max / sp;
                        vy *= cfg.speed_max / sp;
                    }
                    step_bounce(cx, vx, o.half, W);
                    step_bounce(cy, vy, o.half, W);
                    break;
                }
            }
            angle += o.omega;
            o.poses.push_back({cx, cy, angle});
        }
    }

    // Relocate the occluder so it covers the target's mid-episode position.
    if (ep.occluder) {
        OccluderTrack& occ = *ep.occluder;
        const double vx = occ.poses[0].cx, vy = occ.poses[0].cy;
        const int tm = cfg.num_frames / 2;
        const Pose& hit = ep.objects[static_cast<std::size_t>(ep.target_id)]
                              .poses[static_cast<std::size_t>(tm)];
        occ.poses[0] = {hit.cx - vx * tm, hit.cy - vy * tm, 0.0};
        for (int t = 1; t < cfg.num_frames; ++t)
            occ.poses.push_back({occ.poses[0].cx + vx * t, occ.poses[0].cy + vy * t, 0.0});
    }

    const std::vector<ObjectFacts> facts = frame0_facts(ep);
    if (cfg.ambiguous_demo) {
        Description d;
        d.color = facts[static_cast<std::size_t>(ep.target_id)].color;
        d.shape = facts[static_cast<std::size_t>(ep.target_id)].shape;
        ep.description = render_description(d);
    } else {
        ep.description = generate_description(facts, ep.target_id, cfg.frame_size, rng);
    }
    return ep;
}

Image render_frame(const Episode& ep, int t) {
    const int W = ep.cfg.frame_size;
    Image img(3, W, W);
    Rng noise = noise_stream(ep.seed, t);
    for (int y = 0; y < W; ++y) {
        for (int x = 0; x < W; ++x) {
            const float n = static_cast<float>(noise.normal(0.0, ep.cfg.noise_sigma));
            const float v = std::clamp(kBackground + n, 0.0f, 1.0f);
            img.at(0, y, x) = v;
            img.at(1, y, x) = v;
            img.at(2, y, x) = v;
        }
    }

    auto draw_object = [&](const ObjectTrack& o) {
        const Pose& p = o.poses[static_cast<std::size_t>(t)];
        const std::array<float, 3> rgb = color_rgb(o.color);
        const double r = cover_radius(o.shape, o.half);
        const int x0 = std::max(0, static_cast<int>(std::floor(p.cx - r - 1)));
        const int x1 = std::min(W - 1, static_cast<int>(std::ceil(p.cx + r + 1)));
        const int y0 = std::max(0, static_cast<int>(std::floor(p.cy - r - 1)));
        const int y1 = std::min(W - 1, static_cast<int>(std::ceil(p.cy + r + 1)));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                if (inside_shape(o.shape, o.half, p.angle, x + 0.5 - p.cx, y + 0.5 - p.cy))
                    for (int ch = 0; ch < 3; ++ch)
                        img.at(ch, y, x) = rgb[static_cast<std::size_t>(ch)];
    };

    for (int i = 0; i < static_cast<int>(ep.objects.size()); ++i)
        if (i != ep.target_id) draw_object(ep.objects[static_cast<std::size_t>(i)]);
    draw_object(ep.objects[static_cast<std::size_t>(ep.target_id)]);

    if (ep.occluder) {
        const OccluderTrack& occ = *ep.occluder;
        const Pose& p = occ.poses[static_cast<std::size_t>(t)];
        const int x0 = std::max(0, static_cast<int>(std::floor(p.cx - occ.hw)));
        const int x1 = std::min(W - 1, static_cast<int>(std::ceil(p.cx + occ.hw)) - 1);
        const int y0 = std::max(0, static_cast<int>(std::floor(p.cy - occ.hh)));
        const int y1 = std::min(W - 1, static_cast<int>(std::ceil(p.cy + occ.hh)) - 1);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                for (int ch = 0; ch < 3; ++ch) img.at(ch, y, x) = kOccluderGray;
    }
    return img;
}

std::vector<std::uint8_t> target_mask(const Episode& ep, int t) {
    const int W = ep.cfg.frame_size;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(W) * W, 0);
    const ObjectTrack& o = ep.objects[static_cast<std::size_t>(ep.target_id)];
    const Pose& p = o.poses[static_cast<std::size_t>(t)];
    const double r = cover_radius(o.shape, o.half);
    const int x0 = std::max(0, static_cast<int>(std::floor(p.cx - r - 1)));
    const int x1 = std::min(W - 1, static_cast<int>(std::ceil(p.cx + r + 1)));
    const int y0 = std::max(0, static_cast<int>(std::floor(p.cy - r - 1)));
    const int y1 = std::min(W - 1, static_cast<int>(std::ceil(p.cy + r + 1)));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (inside_shape(o.shape, o.half, p.angle, x + 0.5 - p.cx, y + 0.5 - p.cy))
                mask[static_cast<std::size_t>(y) * W + x] = 1;
    return mask;
}

GtBox gt_box(const Episode& ep, int t) {
    const int W = ep.cfg.frame_size;
    const std::vector<std::uint8_t> mask = target_mask(ep, t);
    int mnx = W, mny = W, mxx = -1, mxy = -1;
    for (int y = 0; y < W; ++y)
        for (int x = 0; x < W; ++x)
            if (mask[static_cast<std::size_t>(y) * W + x]) {
                mnx = std::min(mnx, x);
                mny = std::min(mny, y);
                mxx = std::max(mxx, x);
                mxy = std::max(mxy, y);
            }
    GtBox g;
    if (mxx < 0) {
        g.box = {0.0, 0.0, 0.0, 0.0};
        g.out_of_view = true;
        return g;
    }
    g.box = {static_cast<double>(mnx) / W, static_cast<double>(mny) / W,
             static_cast<double>(mxx + 1) / W, static_cast<double>(mxy + 1) / W};
    return g;
}

SequenceSample generate_sequence(const WorldConfig& cfg, std::uint64_t seed) {
    const Episode ep = build_episode(cfg, seed);
    SequenceSample s;
    s.seed = seed;
    s.config_hash = cfg.hash();
    s.target_id = ep.target_id;
    s.description = ep.description;
    s.tokens = tokenize(ep.description);
    s.frames.reserve(static_cast<std::size_t>(cfg.num_frames));
    s.gt.reserve(static_cast<std::size_t>(cfg.num_frames));
    for (int t = 0; t < cfg.num_frames; ++t) {
        s.frames.push_back(render_frame(ep, t));
        s.gt.push_back(gt_box(ep, t));
    }
    return s;
}

}  // namespace nltrack::synth
