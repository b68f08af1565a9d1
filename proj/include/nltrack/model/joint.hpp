#pragma once

#include "nltrack/model/encoders.hpp"
#include "nltrack/model/head.hpp"
#include "nltrack/model/relation.hpp"
#include "nltrack/model/sgtm.hpp"

namespace nltrack::model {

// One grounding or tracking forward pass. target_emb is a null Var in
// flavors without a target decoder.
struct ForwardResult {
    RelationOutput rel;
    BoxPrediction box;
    ag::Var target_emb;
};

// Owns the parameter table for one flavor. Forward passes are const and
// stateless: per-sequence state (the temporal memory) lives with the caller,
// which passes pooled entries in as graph nodes so training can keep them
// attached and inference can feed detached values.
class JointModel {
public:
    JointModel(const ModelConfig& cfg, std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    ParamStore& store() { return store_; }
    const ParamStore& store() const { return store_; }

    ForwardResult ground(ag::Graph& g, ParamBinder& params,
                         const synth::TokenSequence& tokens, const Image& frame) const;

    ForwardResult track(ag::Graph& g, ParamBinder& params,
                        const synth::TokenSequence& tokens, const Image& tmpl,
                        const Image& frame, const std::vector<ag::Var>& memory) const;

    // Tracking with a template already encoded and projected ([n_template,
    // d_model] values). Inference encodes the template once per sequence and
    // replays it as a constant leaf on every frame.
    ForwardResult track_cached(ag::Graph& g, ParamBinder& params,
                               const synth::TokenSequence& tokens,
                               const Tensor& template_emb, const Image& frame,
                               const std::vector<ag::Var>& memory) const;

    // Encode and project a template patch on a private graph, returning the
    // embedding values track_cached expects.
    Tensor encode_template(const Image& tmpl) const;

private:
    ForwardResult forward(ag::Graph& g, ParamBinder& params, Mode mode,
                          const synth::TokenSequence& tokens,
                          std::optional<EmbSeq> ref, const Image& frame,
                          const std::vector<ag::Var>& memory) const;

    ModelConfig cfg_;
    ParamStore store_;
};

}  // namespace nltrack::model
