#pragma once

#include <array>

#include "nltrack/model/blocks.hpp"
#include "nltrack/model/config.hpp"
#include "nltrack/model/relation.hpp"

namespace nltrack::model {

// Box sides shorter than this flag the prediction as degenerate; the clamp
// below only guarantees a strictly positive area for the losses.
inline constexpr double kDegenerateSide = 1e-3;
inline constexpr double kCornerClampEps = 1e-4;

struct BoxPrediction {
    ag::Var raw;      // [1,4] (x1,y1,x2,y2), soft-argmax output
    ag::Var clamped;  // [1,4] with x2 >= x1 + eps, y2 >= y1 + eps
    ag::Var tl_map;   // [1, h*w] probabilities, rows sum to 1
    ag::Var br_map;
    int grid_h = 0;
    int grid_w = 0;
    bool degenerate = false;

    std::array<double, 4> box() const {
        const Tensor& v = clamped.val();
        return {v.d[0], v.d[1], v.d[2], v.d[3]};
    }
};

void register_head(ParamStore& store, const ModelConfig& cfg);

// Cross-attention of the single-element query over h_t. Only present in
// flavors with a decoder.
ag::Var decode_target(ParamBinder& params, const ModelConfig& cfg, const EmbSeq& h_t,
                      ag::Var query);

// Scaled dot-product similarity per token, gating a residual enhancement:
// enhanced_i = h_t_i + <target, h_t_i>/sqrt(d) * h_t_i.
EmbSeq fuse_similarity(ag::Var target_emb, const EmbSeq& h_t);

// Two conv branches produce corner probability maps over the test grid; box
// corners are expectations of cell centers under those maps.
BoxPrediction predict_box(ag::Graph& g, ParamBinder& params, const ModelConfig& cfg,
                          Mode mode, const EmbSeq& features);

}  // namespace nltrack::model
