#include "nltrack/model/config.hpp"

namespace nltrack::model {

const char* flavor_name(Flavor f) {
    switch (f) {
        case Flavor::seprm: return "seprm";
        case Flavor::msrm: return "msrm";
        case Flavor::msrm_tdec: return "msrm_tdec";
        case Flavor::msrm_tm: return "msrm_tm";
        case Flavor::full: return "full";
    }
    fail(ErrorCode::config_invalid, "unknown flavor value");
}

Flavor flavor_from_name(const std::string& name) {
    for (Flavor f : {Flavor::seprm, Flavor::msrm, Flavor::msrm_tdec, Flavor::msrm_tm,
                     Flavor::full})
        if (name == flavor_name(f)) return f;
    fail(ErrorCode::config_invalid, "unknown flavor: " + name);
}

void ModelConfig::validate() const {
    auto bad = [](const std::string& msg) { fail(ErrorCode::config_invalid, msg); };
    if (d_model <= 0 || d_lang <= 0 || d_vis <= 0) bad("embedding dims must be positive");
    if (n_heads <= 0 || d_model % n_heads != 0) bad("d_model must divide into heads");
    if (ffn_ratio < 1) bad("ffn_ratio must be at least 1");
    if (patch_size <= 0 || frame_size <= 0 || template_size <= 0)
        bad("geometry must be positive");
    if (frame_size % patch_size != 0) bad("frame_size must be a multiple of patch_size");
    if (template_size % patch_size != 0)
        bad("template_size must be a multiple of patch_size");
    if (template_size > frame_size) bad("template cannot exceed the frame");
    if (vocab_size < 3) bad("vocabulary too small for the special tokens");
    if (max_tokens < 2) bad("max_tokens too small");
    if (layers_lang < 0 || layers_vis < 0 || layers_relation < 0 || layers_decoder < 0 ||
        layers_temporal_enc < 0 || layers_temporal_dec < 0)
        bad("layer counts cannot be negative");
    if (roi_size < 1) bad("roi_size must be at least 1");
    if (memory_capacity < 1) bad("memory_capacity must be at least 1");
}

}  // namespace nltrack::model
