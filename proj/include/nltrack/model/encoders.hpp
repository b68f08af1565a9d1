#pragma once

#include "nltrack/core/image.hpp"
#include "nltrack/model/blocks.hpp"
#include "nltrack/model/config.hpp"
#include "nltrack/synth/language.hpp"

namespace nltrack::model {

void register_encoders(ParamStore& store, const ModelConfig& cfg);

// Token embedding + learned positions + self-attention stack. Output length
// is always max_tokens; PAD positions carry mask = 1 and are never attended.
EmbSeq encode_language(ParamBinder& params, const ModelConfig& cfg,
                       const synth::TokenSequence& tokens);

// Patch embedding (non-overlapping patch_size squares, raster order) +
// learned 2-D positions + self-attention stack. Template images reuse the
// frame's positional table through its top-left corner, so both sizes share
// every parameter. Throws shape_error for non-divisible or oversized inputs.
EmbSeq encode_vision(ag::Graph& g, ParamBinder& params, const ModelConfig& cfg,
                     const Image& image);

// Linear maps into the shared d_model space; masks pass through.
EmbSeq project_language(ParamBinder& params, const ModelConfig& cfg, const EmbSeq& seq);
EmbSeq project_vision(ParamBinder& params, const ModelConfig& cfg, const EmbSeq& seq);

}  // namespace nltrack::model
