#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nltrack/core/rng.hpp"

namespace nltrack::synth {

// Closed vocabulary: PAD=0, CLS=1, SEP=2 followed by the word list.
constexpr int kPadId = 0;
constexpr int kClsId = 1;
constexpr int kSepId = 2;
constexpr int kMaxTokens = 40;

const std::vector<std::string>& vocabulary();  // size 40
int vocab_size();
int word_id(const std::string& word);          // -1 when unknown

struct TokenSequence {
    std::vector<int> ids;            // length kMaxTokens
    std::vector<std::uint8_t> mask;  // length kMaxTokens, 1 = valid
    int vocab_size = 0;

    int valid_count() const {
        int n = 0;
        for (auto m : mask) n += m;
        return n;
    }
};

// ids = [CLS, words..., SEP, PAD...]; throws unknown_word / length_overflow.
TokenSequence tokenize(const std::string& text);
std::string detokenize(const TokenSequence& tokens);

// Frame-0 facts about one object, sufficient to evaluate every description
// predicate the grammar can express.
struct ObjectFacts {
    int color;          // synth::Color as int
    int shape;          // synth::Shape as int
    double cx, cy;      // px
    double vx, vy;      // px/frame
};

enum class Dir : std::uint8_t { left, right, up, down };
// Dominant-axis heading; horizontal wins ties. In image coordinates "up"
// means decreasing y.
Dir direction_of(double vx, double vy);
const char* dir_name(Dir d);

// Grammar: "the <color> <shape> [moving <dir>] [on the <left|right> side |
// in the <top|bottom> half]". The parsed form:
struct Description {
    int color = -1;
    int shape = -1;
    int dir = -1;       // Dir as int, -1 = absent
    int spatial = -1;   // 0 left side, 1 right side, 2 top half, 3 bottom half; -1 = absent
};

std::string render_description(const Description& d);
// Inverse of render_description; throws parse_error on non-grammar text.
Description parse_description(const std::string& text);

bool satisfies(const Description& d, const ObjectFacts& o, int frame_size);
int count_matches(const Description& d, const std::vector<ObjectFacts>& objs, int frame_size);

// Shortest grammar string (by word count) uniquely picking out the target;
// ties broken by rng. Throws uniqueness_unsatisfiable when no grammar string
// separates the target from every distractor.
std::string generate_description(const std::vector<ObjectFacts>& objs, int target_id,
                                 int frame_size, Rng& rng);

}  // namespace nltrack::synth
