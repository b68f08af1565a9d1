#include "nltrack/synth/language.hpp"

#include <algorithm>
#include <sstream>

#include "nltrack/common.hpp"
#include "nltrack/synth/world.hpp"

namespace nltrack::synth {

namespace {

// 3 specials + 37 words = 40. The tail words beyond the grammar keep room for
// handwritten demo queries; their embeddings train from scratch like the rest.
const std::vector<std::string> kVocab = {
    "<pad>", "<cls>", "<sep>",
    "the", "red", "green", "blue", "yellow", "purple", "orange",
    "square", "circle", "triangle",
    "moving", "left", "right", "up", "down",
    "on", "side", "in", "top", "bottom", "half",
    "a", "an", "is", "that", "which", "object", "shape",
    "small", "large", "fast", "slow", "dark", "bright", "gray",
    "near", "center",
};

const char* kDirNames[4] = {"left", "right", "up", "down"};

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string w;
    while (ss >> w) out.push_back(w);
    return out;
}

}  // namespace

const std::vector<std::string>& vocabulary() { return kVocab; }

int vocab_size() { return static_cast<int>(kVocab.size()); }

int word_id(const std::string& word) {
    for (std::size_t i = 3; i < kVocab.size(); ++i)
        if (kVocab[i] == word) return static_cast<int>(i);
    return -1;
}

TokenSequence tokenize(const std::string& text) {
    const std::vector<std::string> words = split_words(text);
    if (static_cast<int>(words.size()) + 2 > kMaxTokens)
        fail(ErrorCode::length_overflow,
             "query of " + std::to_string(words.size()) + " words exceeds " +
                 std::to_string(kMaxTokens - 2));
    TokenSequence t;
    t.ids.assign(kMaxTokens, kPadId);
    t.mask.assign(kMaxTokens, 0);
    t.vocab_size = vocab_size();
    t.ids[0] = kClsId;
    t.mask[0] = 1;
    int at = 1;
    for (const std::string& w : words) {
        const int id = word_id(w);
        if (id < 0) fail(ErrorCode::unknown_word, "word not in vocabulary: " + w);
        t.ids[static_cast<std::size_t>(at)] = id;
        t.mask[static_cast<std::size_t>(at)] = 1;
        ++at;
    }
    t.ids[static_cast<std::size_t>(at)] = kSepId;
    t.mask[static_cast<std::size_t>(at)] = 1;
    return t;
}

std::string detokenize(const TokenSequence& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.ids.size(); ++i) {
        if (!tokens.mask[i]) continue;
        const int id = tokens.ids[i];
        if (id == kClsId || id == kSepId) continue;
        if (!out.empty()) out += ' ';
        out += kVocab[static_cast<std::size_t>(id)];
    }
    return out;
}

Dir direction_of(double vx, double vy) {
    if (std::abs(vx) >= std::abs(vy)) return vx < 0 ? Dir::left : Dir::right;
    return vy < 0 ? Dir::up : Dir::down;
}

const char* dir_name(Dir d) { return kDirNames[static_cast<int>(d)]; }

std::string render_description(const Description& d) {
    std::string out = "the ";
    out += color_name(static_cast<Color>(d.color));
    out += ' ';
    out += shape_name(static_cast<Shape>(d.shape));
    if (d.dir >= 0) {
        out += " moving ";
        out += kDirNames[d.dir];
    }
    switch (d.spatial) {
        case 0: out += " on the left side"; break;
        case 1: out += " on the right side"; break;
        case 2: out += " in the top half"; break;
        case 3: out += " in the bottom half"; break;
        default: break;
    }
    return out;
}

Description parse_description(const std::string& text) {
    const std::vector<std::string> w = split_words(text);
    std::size_t i = 0;
    auto expect = [&](const char* word) {
        if (i >= w.size() || w[i] != word)
            fail(ErrorCode::parse_error, "description does not follow the grammar: " + text);
        ++i;
    };
    Description d;
    expect("the");
    if (i >= w.size()) fail(ErrorCode::parse_error, "description missing color: " + text);
    for (int c = 0; c < kColorCount; ++c)
        if (w[i] == color_name(static_cast<Color>(c))) d.color = c;
    if (d.color < 0) fail(ErrorCode::parse_error, "unknown color in description: " + text);
    ++i;
    if (i >= w.size()) fail(ErrorCode::parse_error, "description missing shape: " + text);
    for (int s = 0; s < kShapeCount; ++s)
        if (w[i] == shape_name(static_cast<Shape>(s))) d.shape = s;
    if (d.shape < 0) fail(ErrorCode::parse_error, "unknown shape in description: " + text);
    ++i;
    if (i < w.size() && w[i] == "moving") {
        ++i;
        if (i >= w.size()) fail(ErrorCode::parse_error, "dangling 'moving': " + text);
        for (int k = 0; k < 4; ++k)
            if (w[i] == kDirNames[k]) d.dir = k;
        if (d.dir < 0) fail(ErrorCode::parse_error, "unknown direction: " + text);
        ++i;
    }
    if (i < w.size()) {
        if (w[i] == "on") {
            ++i;
            expect("the");
            if (i < w.size() && w[i] == "left")
                d.spatial = 0;
            else if (i < w.size() && w[i] == "right")
                d.spatial = 1;
            else
                fail(ErrorCode::parse_error, "unknown side: " + text);
            ++i;
            expect("side");
        } else if (w[i] == "in") {
            ++i;
            expect("the");
            if (i < w.size() && w[i] == "top")
                d.spatial = 2;
            else if (i < w.size() && w[i] == "bottom")
                d.spatial = 3;
            else
                fail(ErrorCode::parse_error, "unknown half: " + text);
            ++i;
            expect("half");
        }
    }
    if (i != w.size())
        fail(ErrorCode::parse_error, "trailing words in description: " + text);
    return d;
}

bool satisfies(const Description& d, const ObjectFacts& o, int frame_size) {
    if (d.color >= 0 && o.color != d.color) return false;
    if (d.shape >= 0 && o.shape != d.shape) return false;
    if (d.dir >= 0 && static_cast<int>(direction_of(o.vx, o.vy)) != d.dir) return false;
    const double mid = frame_size / 2.0;
    switch (d.spatial) {
        case 0: if (!(o.cx < mid)) return false; break;
        case 1: if (!(o.cx >= mid)) return false; break;
        case 2: if (!(o.cy < mid)) return false; break;
        case 3: if (!(o.cy >= mid)) return false; break;
        default: break;
    }
    return true;
}

int count_matches(const Description& d, const std::vector<ObjectFacts>& objs, int frame_size) {
    int n = 0;
    for (const ObjectFacts& o : objs) n += satisfies(d, o, frame_size) ? 1 : 0;
    return n;
}

std::string generate_description(const std::vector<ObjectFacts>& objs, int target_id,
                                 int frame_size, Rng& rng) {
    const ObjectFacts& tgt = objs[static_cast<std::size_t>(target_id)];

    // Enumerate every grammar string whose predicates the target satisfies,
    // in a fixed order; keep the unique ones.
    std::vector<Description> candidates;
    for (const int dir : {-1, 0, 1, 2, 3}) {
        if (dir >= 0 && static_cast<int>(direction_of(tgt.vx, tgt.vy)) != dir) continue;
        for (const int spatial : {-1, 0, 1, 2, 3}) {
            Description d;
            d.color = tgt.color;
            d.shape = tgt.shape;
            d.dir = dir;
            d.spatial = spatial;
            if (!satisfies(d, tgt, frame_size)) continue;
            if (count_matches(d, objs, frame_size) == 1) candidates.push_back(d);
        }
    }
    if (candidates.empty())
        fail(ErrorCode::uniqueness_unsatisfiable,
             "no grammar string separates the target from its distractors");

    std::size_t best_words = SIZE_MAX;
    std::vector<Description> shortest;
    for (const Description& d : candidates) {
        const std::size_t n = split_words(render_description(d)).size();
        if (n < best_words) {
            best_words = n;
            shortest.clear();
        }
        if (n == best_words) shortest.push_back(d);
    }
    const std::size_t pick =
        shortest.size() == 1 ? 0 : static_cast<std::size_t>(rng.uniform_int(
                                       static_cast<int>(shortest.size())));
    return render_description(shortest[pick]);
}

}  // namespace nltrack::synth
