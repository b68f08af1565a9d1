#pragma once

#include <optional>

#include "nltrack/model/blocks.hpp"
#include "nltrack/model/config.hpp"

namespace nltrack::model {

enum class Mode : int { grounding = 0, tracking = 1 };

// Fixed layout of the joint sequence: [language | reference | test]. In
// grounding the reference block is a zero placeholder, fully masked, the same
// length as a real template so one positional table serves both modes.
struct SegmentOffsets {
    int lang_begin = 0;
    int ref_begin = 0;
    int test_begin = 0;
    int end = 0;
};

struct RelationInput {
    ag::Var concat;
    std::vector<std::uint8_t> mask;
    SegmentOffsets offsets;
    Mode mode = Mode::grounding;
};

struct RelationOutput {
    EmbSeq h_l;
    EmbSeq h_ref;  // placeholder positions in grounding, template in tracking
    EmbSeq h_t;    // carries the test-image grid shape
    ag::Var nl_cls;  // == h_l row 0
};

// Throws mode_error when the template's presence disagrees with the mode.
RelationInput build_reference(ag::Graph& g, const ModelConfig& cfg, Mode mode,
                              const EmbSeq& lang, const std::optional<EmbSeq>& tmpl,
                              const EmbSeq& test);

void register_relation(ParamStore& store, const ModelConfig& cfg);

// Learned positions over the joint sequence, then the relation encoder. One
// parameter set serves both modes unless the config asks for separate
// per-mode encoders.
RelationOutput relation_encode(ParamBinder& params, const ModelConfig& cfg,
                               const RelationInput& input);

}  // namespace nltrack::model
