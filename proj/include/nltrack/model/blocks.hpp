#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nltrack/core/autograd.hpp"
#include "nltrack/core/params.hpp"

namespace nltrack::model {

// A token sequence flowing through the model. mask uses the attention-key
// convention: 1 = ignore, 0 = attend. grid_h/grid_w are set for vision
// sequences (rows are in raster order), 0 otherwise.
struct EmbSeq {
    ag::Var vectors;
    std::vector<std::uint8_t> mask;
    int grid_h = 0;
    int grid_w = 0;

    int length() const { return vectors.rows(); }
};

// Parameter names are "<prefix>.<leaf>"; every register_* call here has a
// forward counterpart reading exactly the same names.

void register_attention(ParamStore& store, const std::string& prefix, int d,
                        ParamGroup group);
void register_layer_norm(ParamStore& store, const std::string& prefix, int d,
                         ParamGroup group);
void register_encoder_layer(ParamStore& store, const std::string& prefix, int d,
                            int ffn_ratio, ParamGroup group);
void register_cross_layer(ParamStore& store, const std::string& prefix, int d,
                          int ffn_ratio, ParamGroup group);

// Multi-head scaled dot-product attention. q: [Lq,d], kv: [Lk,d]; key_mask
// (empty or length Lk) marks keys that receive exactly zero weight.
ag::Var multi_head_attention(ParamBinder& params, const std::string& prefix,
                             ag::Var q, ag::Var kv,
                             const std::vector<std::uint8_t>& key_mask, int n_heads);

// Pre-norm self-attention encoder layer: x + MHA(LN(x)), then + FFN(LN(.)).
// FFN width is fixed at registration; the forward reads it from the store.
ag::Var encoder_layer(ParamBinder& params, const std::string& prefix, ag::Var x,
                      const std::vector<std::uint8_t>& key_mask, int n_heads);

// Pre-norm cross-attention decoder layer (no self-attention): the query
// attends to kv, then a per-row FFN. Used where the query side has length 1,
// making self-attention degenerate.
ag::Var cross_layer(ParamBinder& params, const std::string& prefix, ag::Var q,
                    ag::Var kv, const std::vector<std::uint8_t>& key_mask,
                    int n_heads);

ag::Var final_norm(ParamBinder& params, const std::string& prefix, ag::Var x);

// Encoder stack: adds nothing at depth 0, otherwise n layers + closing norm.
void register_encoder_stack(ParamStore& store, const std::string& prefix, int d,
                            int n_layers, int ffn_ratio, ParamGroup group);
ag::Var encoder_stack(ParamBinder& params, const std::string& prefix, ag::Var x,
                      const std::vector<std::uint8_t>& key_mask, int n_layers,
                      int n_heads);

// Decoder stack of cross-attention layers; same depth-0 identity convention.
void register_cross_stack(ParamStore& store, const std::string& prefix, int d,
                          int n_layers, int ffn_ratio, ParamGroup group);
ag::Var cross_stack(ParamBinder& params, const std::string& prefix, ag::Var q,
                    ag::Var kv, const std::vector<std::uint8_t>& key_mask,
                    int n_layers, int n_heads);

}  // namespace nltrack::model
