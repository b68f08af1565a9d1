#include "nltrack/model/head.hpp"

#include <cmath>
#include <string>

#include "nltrack/common.hpp"

namespace nltrack::model {

namespace {

std::string head_prefix(const ModelConfig& cfg, Mode mode) {
    if (!cfg.separate_relation()) return "head";
    return mode == Mode::grounding ? "headg" : "headt";
}

void register_corner_branch(ParamStore& store, const std::string& prefix, int d) {
    store.add(prefix + ".c1.w", 9 * d, 32, Init::gaussian());
    store.add(prefix + ".c1.b", 1, 32, Init::zero());
    store.add(prefix + ".c2.w", 9 * 32, 16, Init::gaussian());
    store.add(prefix + ".c2.b", 1, 16, Init::zero());
    store.add(prefix + ".c3.w", 9 * 16, 1, Init::gaussian());
    store.add(prefix + ".c3.b", 1, 1, Init::zero());
}

// [h*w, d] features -> [1, h*w] probability map.
ag::Var corner_map(ParamBinder& p, const std::string& prefix, ag::Var x, int h, int w) {
    ag::Var c1 = ag::relu(ag::conv3x3(x, h, w, p[prefix + ".c1.w"], p[prefix + ".c1.b"]));
    ag::Var c2 = ag::relu(ag::conv3x3(c1, h, w, p[prefix + ".c2.w"], p[prefix + ".c2.b"]));
    ag::Var c3 = ag::conv3x3(c2, h, w, p[prefix + ".c3.w"], p[prefix + ".c3.b"]);
    return ag::softmax_rows(ag::reshape(c3, 1, h * w));
}

}  // namespace

void register_head(ParamStore& store, const ModelConfig& cfg) {
    if (cfg.has_decoder()) {
        store.add("dec.query", 1, cfg.d_model, Init::gaussian());
        register_cross_stack(store, "dec", cfg.d_model, cfg.layers_decoder,
                             cfg.ffn_ratio, ParamGroup::main);
    }
    if (cfg.separate_relation()) {
        register_corner_branch(store, "headg.tl", cfg.d_model);
        register_corner_branch(store, "headg.br", cfg.d_model);
        register_corner_branch(store, "headt.tl", cfg.d_model);
        register_corner_branch(store, "headt.br", cfg.d_model);
    } else {
        register_corner_branch(store, "head.tl", cfg.d_model);
        register_corner_branch(store, "head.br", cfg.d_model);
    }
}

ag::Var decode_target(ParamBinder& params, const ModelConfig& cfg, const EmbSeq& h_t,
                      ag::Var query) {
    if (!cfg.has_decoder()) fail(ErrorCode::mode_error, "this flavor has no target decoder");
    if (query.rows() != 1 || query.cols() != cfg.d_model)
        fail(ErrorCode::shape_error, "target query must be a single d_model row");
    return cross_stack(params, "dec", query, h_t.vectors, h_t.mask, cfg.layers_decoder,
                       cfg.n_heads);
}

EmbSeq fuse_similarity(ag::Var target_emb, const EmbSeq& h_t) {
    if (target_emb.rows() != 1 || target_emb.cols() != h_t.vectors.cols())
        fail(ErrorCode::shape_error, "target embedding shape disagrees with h_t");
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(h_t.vectors.cols()));
    ag::Var s = ag::scale(ag::matmul_nt(h_t.vectors, target_emb), inv_sqrt_d);
    ag::Var enhanced = ag::add(h_t.vectors, ag::scale_rows(h_t.vectors, s));
    return EmbSeq{enhanced, h_t.mask, h_t.grid_h, h_t.grid_w};
}

BoxPrediction predict_box(ag::Graph& g, ParamBinder& params, const ModelConfig& cfg,
                          Mode mode, const EmbSeq& features) {
    const int h = features.grid_h;
    const int w = features.grid_w;
    if (h <= 0 || w <= 0 || features.length() != h * w)
        fail(ErrorCode::shape_error, "box head needs grid-shaped features");

    const std::string prefix = head_prefix(cfg, mode);
    ag::Var tl = corner_map(params, prefix + ".tl", features.vectors, h, w);
    ag::Var br = corner_map(params, prefix + ".br", features.vectors, h, w);

    // Expectation of cell centers: cell (r,c) sits at ((c+0.5)/w, (r+0.5)/h).
    Tensor xs(1, h * w);
    Tensor ys(1, h * w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            xs.at(0, r * w + c) = (c + 0.5) / w;
            ys.at(0, r * w + c) = (r + 0.5) / h;
        }
    ag::Var xs_leaf = g.leaf(std::move(xs));
    ag::Var ys_leaf = g.leaf(std::move(ys));

    ag::Var x1 = ag::matmul_nt(tl, xs_leaf);
    ag::Var y1 = ag::matmul_nt(tl, ys_leaf);
    ag::Var x2 = ag::matmul_nt(br, xs_leaf);
    ag::Var y2 = ag::matmul_nt(br, ys_leaf);

    BoxPrediction out;
    out.raw = ag::concat_cols({x1, y1, x2, y2});
    ag::Var x2c = ag::maximum(x2, ag::add_const(x1, kCornerClampEps));
    ag::Var y2c = ag::maximum(y2, ag::add_const(y1, kCornerClampEps));
    out.clamped = ag::concat_cols({x1, y1, x2c, y2c});
    out.tl_map = tl;
    out.br_map = br;
    out.grid_h = h;
    out.grid_w = w;
    const Tensor& rv = out.raw.val();
    out.degenerate =
        (rv.d[2] - rv.d[0] < kDegenerateSide) || (rv.d[3] - rv.d[1] < kDegenerateSide);
    return out;
}

}  // namespace nltrack::model
