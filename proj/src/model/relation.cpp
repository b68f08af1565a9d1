#include "nltrack/model/relation.hpp"

#include "nltrack/common.hpp"

namespace nltrack::model {

namespace {

std::string relation_prefix(const ModelConfig& cfg, Mode mode) {
    if (!cfg.separate_relation()) return "rel";
    return mode == Mode::grounding ? "relg" : "relt";
}

}  // namespace

RelationInput build_reference(ag::Graph& g, const ModelConfig& cfg, Mode mode,
                              const EmbSeq& lang, const std::optional<EmbSeq>& tmpl,
                              const EmbSeq& test) {
    if (mode == Mode::grounding && tmpl.has_value())
        fail(ErrorCode::mode_error, "grounding takes no template");
    if (mode == Mode::tracking && !tmpl.has_value())
        fail(ErrorCode::mode_error, "tracking requires a template");
    if (lang.length() != cfg.n_lang() || test.length() != cfg.n_test())
        fail(ErrorCode::shape_error, "relation input lengths disagree with config");
    if (tmpl && tmpl->length() != cfg.n_template())
        fail(ErrorCode::shape_error, "template length disagrees with config");

    EmbSeq ref;
    if (tmpl) {
        ref = *tmpl;
    } else {
        ref.vectors = g.leaf(Tensor::zeros(cfg.n_template(), cfg.d_model));
        ref.mask.assign(static_cast<std::size_t>(cfg.n_template()), 1);
    }

    RelationInput input;
    input.mode = mode;
    input.concat = ag::concat_rows({lang.vectors, ref.vectors, test.vectors});
    input.mask = lang.mask;
    input.mask.insert(input.mask.end(), ref.mask.begin(), ref.mask.end());
    input.mask.insert(input.mask.end(), test.mask.begin(), test.mask.end());
    input.offsets = SegmentOffsets{0, cfg.n_lang(), cfg.n_lang() + cfg.n_template(),
                                   cfg.concat_len()};
    return input;
}

void register_relation(ParamStore& store, const ModelConfig& cfg) {
    const int len = cfg.concat_len();
    if (cfg.separate_relation()) {
        store.add("relg.pos", len, cfg.d_model, Init::gaussian());
        register_encoder_stack(store, "relg", cfg.d_model, cfg.layers_relation,
                               cfg.ffn_ratio, ParamGroup::main);
        store.add("relt.pos", len, cfg.d_model, Init::gaussian());
        register_encoder_stack(store, "relt", cfg.d_model, cfg.layers_relation,
                               cfg.ffn_ratio, ParamGroup::main);
    } else {
        store.add("rel.pos", len, cfg.d_model, Init::gaussian());
        register_encoder_stack(store, "rel", cfg.d_model, cfg.layers_relation,
                               cfg.ffn_ratio, ParamGroup::main);
    }
}

RelationOutput relation_encode(ParamBinder& params, const ModelConfig& cfg,
                               const RelationInput& input) {
    if (input.concat.rows() != cfg.concat_len() ||
        static_cast<int>(input.mask.size()) != cfg.concat_len())
        fail(ErrorCode::shape_error, "joint sequence length disagrees with the positional table");

    const std::string prefix = relation_prefix(cfg, input.mode);
    ag::Var x = ag::add(input.concat, params[prefix + ".pos"]);
    x = encoder_stack(params, prefix, x, input.mask, cfg.layers_relation, cfg.n_heads);

    const SegmentOffsets& o = input.offsets;
    RelationOutput out;
    out.h_l.vectors = ag::slice_rows(x, o.lang_begin, o.ref_begin);
    out.h_l.mask.assign(input.mask.begin() + o.lang_begin, input.mask.begin() + o.ref_begin);
    out.h_ref.vectors = ag::slice_rows(x, o.ref_begin, o.test_begin);
    out.h_ref.mask.assign(input.mask.begin() + o.ref_begin, input.mask.begin() + o.test_begin);
    out.h_t.vectors = ag::slice_rows(x, o.test_begin, o.end);
    out.h_t.mask.assign(input.mask.begin() + o.test_begin, input.mask.begin() + o.end);
    out.h_t.grid_h = cfg.grid();
    out.h_t.grid_w = cfg.grid();
    out.nl_cls = ag::slice_rows(out.h_l.vectors, 0, 1);
    return out;
}

}  // namespace nltrack::model
