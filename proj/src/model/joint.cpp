#include "nltrack/model/joint.hpp"

#include "nltrack/common.hpp"

namespace nltrack::model {

JointModel::JointModel(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    register_encoders(store_, cfg_);
    register_relation(store_, cfg_);
    register_head(store_, cfg_);
    register_temporal(store_, cfg_);
    store_.initialize(seed);
}

ForwardResult JointModel::ground(ag::Graph& g, ParamBinder& params,
                                 const synth::TokenSequence& tokens,
                                 const Image& frame) const {
    return forward(g, params, Mode::grounding, tokens, std::nullopt, frame, {});
}

ForwardResult JointModel::track(ag::Graph& g, ParamBinder& params,
                                const synth::TokenSequence& tokens, const Image& tmpl,
                                const Image& frame,
                                const std::vector<ag::Var>& memory) const {
    EmbSeq ref = project_vision(params, cfg_, encode_vision(g, params, cfg_, tmpl));
    return forward(g, params, Mode::tracking, tokens, std::move(ref), frame, memory);
}

ForwardResult JointModel::track_cached(ag::Graph& g, ParamBinder& params,
                                       const synth::TokenSequence& tokens,
                                       const Tensor& template_emb, const Image& frame,
                                       const std::vector<ag::Var>& memory) const {
    if (template_emb.rows != cfg_.n_template() || template_emb.cols != cfg_.d_model)
        fail(ErrorCode::shape_error, "cached template embedding has the wrong shape");
    EmbSeq ref;
    ref.vectors = g.leaf(template_emb);
    ref.mask.assign(static_cast<std::size_t>(template_emb.rows), 0);
    ref.grid_h = cfg_.template_grid();
    ref.grid_w = cfg_.template_grid();
    return forward(g, params, Mode::tracking, tokens, std::move(ref), frame, memory);
}

Tensor JointModel::encode_template(const Image& tmpl) const {
    ag::Graph g;
    ParamBinder params(g, store_, false);
    return project_vision(params, cfg_, encode_vision(g, params, cfg_, tmpl)).vectors.val();
}

ForwardResult JointModel::forward(ag::Graph& g, ParamBinder& params, Mode mode,
                                  const synth::TokenSequence& tokens,
                                  std::optional<EmbSeq> ref, const Image& frame,
                                  const std::vector<ag::Var>& memory) const {
    if (mode == Mode::grounding && !memory.empty())
        fail(ErrorCode::mode_error, "grounding cannot consume temporal memory");

    EmbSeq lang = project_language(params, cfg_, encode_language(params, cfg_, tokens));
    EmbSeq test = project_vision(params, cfg_, encode_vision(g, params, cfg_, frame));

    RelationInput input = build_reference(g, cfg_, mode, lang, ref, test);
    ForwardResult out;
    out.rel = relation_encode(params, cfg_, input);

    EmbSeq features = out.rel.h_t;
    if (cfg_.has_decoder()) {
        ag::Var query = params["dec.query"];
        if (cfg_.has_memory()) {
            std::optional<ag::Var> cls;
            if (cfg_.memory_uses_cls()) cls = out.rel.nl_cls;
            query = ag::add(query, temporal_clue(g, params, cfg_, memory, cls));
        }
        out.target_emb = decode_target(params, cfg_, out.rel.h_t, query);
        features = fuse_similarity(out.target_emb, out.rel.h_t);
    }
    out.box = predict_box(g, params, cfg_, mode, features);
    return out;
}

}  // namespace nltrack::model
