#pragma once

#include <string>

#include "nltrack/common.hpp"

namespace nltrack::model {

// Ablation flavors, ordered by how much of the full design they keep:
//   seprm      separate relation encoders and heads per mode, no decoder
//   msrm       one shared relation encoder + head, box head reads h_t directly
//   msrm_tdec  msrm + target decoder with a learnable query
//   msrm_tm    msrm_tdec + temporal memory, but the temporal encoder sees only
//              the pooled patches (no language CLS guidance)
//   full       everything, language CLS included in the temporal encoder
enum class Flavor : int { seprm = 0, msrm, msrm_tdec, msrm_tm, full };

const char* flavor_name(Flavor f);
Flavor flavor_from_name(const std::string& name);  // throws config_invalid

struct ModelConfig {
    Flavor flavor = Flavor::full;

    int d_model = 64;
    int d_lang = 64;
    int d_vis = 64;
    int n_heads = 4;
    int ffn_ratio = 4;

    int patch_size = 8;
    int frame_size = 80;
    int template_size = 32;

    int vocab_size = 40;
    int max_tokens = 40;

    int layers_lang = 2;
    int layers_vis = 2;
    int layers_relation = 4;
    int layers_decoder = 2;
    int layers_temporal_enc = 2;
    int layers_temporal_dec = 2;

    int roi_size = 6;
    int memory_capacity = 3;

    int grid() const { return frame_size / patch_size; }
    int template_grid() const { return template_size / patch_size; }
    int n_test() const { return grid() * grid(); }
    int n_template() const { return template_grid() * template_grid(); }
    int n_lang() const { return max_tokens; }
    int concat_len() const { return n_lang() + n_template() + n_test(); }

    bool has_decoder() const { return flavor != Flavor::seprm && flavor != Flavor::msrm; }
    bool has_memory() const { return flavor == Flavor::msrm_tm || flavor == Flavor::full; }
    bool memory_uses_cls() const { return flavor == Flavor::full; }
    bool separate_relation() const { return flavor == Flavor::seprm; }

    void validate() const;  // throws config_invalid
};

}  // namespace nltrack::model
