#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nltrack/core/image.hpp"
#include "nltrack/core/rng.hpp"
#include "nltrack/synth/language.hpp"

namespace nltrack::synth {

enum class Color : std::uint8_t { red, green, blue, yellow, purple, orange };
enum class Shape : std::uint8_t { square, circle, triangle };
enum class Motion : std::uint8_t { linear, bounce, random_walk };

constexpr int kColorCount = 6;
constexpr int kShapeCount = 3;

const char* color_name(Color c);
const char* shape_name(Shape s);
std::array<float, 3> color_rgb(Color c);

struct WorldConfig {
    int frame_size = 80;    // square frames, must be divisible by the vision patch size
    int num_frames = 24;
    int num_objects = 3;    // in [2, 6]
    std::vector<Shape> shape_set = {Shape::square, Shape::circle, Shape::triangle};
    std::vector<Color> color_set = {Color::red,    Color::green,  Color::blue,
                                    Color::yellow, Color::purple, Color::orange};
    Motion motion = Motion::bounce;
    double occluder_prob = 0.25;

    // Hardness and rendering dials; defaults give the documented world.
    double half_min = 6.0, half_max = 11.0;     // object half-extent, px
    double speed_min = 0.5, speed_max = 2.5;    // px per frame
    double rotation_max_deg = 6.0;              // per-frame spin bound
    double twin_prob = 0.0;                     // same color+shape distractor episodes
    double noise_sigma = 0.02;
    bool ambiguous_demo = false;                // deliberately ambiguous description

    // Canonical key=value text (sorted keys) and its FNV-1a hash; the hash is
    // echoed into dataset records and downstream reports.
    std::string canonical_text() const;
    std::uint64_t hash() const;
};

// Throws config_invalid / uniqueness_unsatisfiable.
void validate(const WorldConfig& cfg);

struct Pose {
    double cx, cy;   // px, frame coordinates (y grows downward)
    double angle;    // radians
};

struct ObjectTrack {
    Color color;
    Shape shape;
    double half;                 // px
    double vx0, vy0;             // frame-0 velocity, px/frame
    double omega;                // spin, radians/frame
    std::vector<Pose> poses;     // one per frame
};

struct OccluderTrack {
    double hw, hh;               // half extents, px
    std::vector<Pose> poses;
};

// Simulated episode before rasterization.
struct Episode {
    WorldConfig cfg;
    std::uint64_t seed = 0;
    int target_id = 0;
    std::string description;
    std::vector<ObjectTrack> objects;
    std::optional<OccluderTrack> occluder;
};

struct GtBox {
    std::array<double, 4> box;   // normalized x1,y1,x2,y2; zeros when out of view
    bool out_of_view = false;
};

Episode build_episode(const WorldConfig& cfg, std::uint64_t seed);

// Rasterization. Pixel (x, y) belongs to a shape when its center
// (x+0.5, y+0.5) lies inside; the target is drawn above all distractors and
// only the occluder may cover it.
Image render_frame(const Episode& ep, int t);
std::vector<std::uint8_t> target_mask(const Episode& ep, int t);  // h*w, 1 = target pixel
GtBox gt_box(const Episode& ep, int t);

// One fully materialized training/eval sample.
struct SequenceSample {
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    int target_id = 0;
    std::string description;
    TokenSequence tokens;
    std::vector<Image> frames;
    std::vector<GtBox> gt;
};

SequenceSample generate_sequence(const WorldConfig& cfg, std::uint64_t seed);

}  // namespace nltrack::synth
