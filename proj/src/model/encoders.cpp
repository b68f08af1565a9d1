#include "nltrack/model/encoders.hpp"

#include "nltrack/common.hpp"

namespace nltrack::model {

void register_encoders(ParamStore& store, const ModelConfig& cfg) {
    const ParamGroup g = ParamGroup::encoder;
    store.add("lang.tok", cfg.vocab_size, cfg.d_lang, Init::gaussian(), g);
    store.add("lang.pos", cfg.max_tokens, cfg.d_lang, Init::gaussian(), g);
    register_encoder_stack(store, "lang", cfg.d_lang, cfg.layers_lang, cfg.ffn_ratio, g);

    const int patch_dim = 3 * cfg.patch_size * cfg.patch_size;
    store.add("vis.patch.w", patch_dim, cfg.d_vis, Init::gaussian(), g);
    store.add("vis.patch.b", 1, cfg.d_vis, Init::zero(), g);
    store.add("vis.pos", cfg.n_test(), cfg.d_vis, Init::gaussian(), g);
    register_encoder_stack(store, "vis", cfg.d_vis, cfg.layers_vis, cfg.ffn_ratio, g);

    store.add("lang.proj.w", cfg.d_lang, cfg.d_model, Init::gaussian());
    store.add("lang.proj.b", 1, cfg.d_model, Init::zero());
    store.add("vis.proj.w", cfg.d_vis, cfg.d_model, Init::gaussian());
    store.add("vis.proj.b", 1, cfg.d_model, Init::zero());
}

EmbSeq encode_language(ParamBinder& params, const ModelConfig& cfg,
                       const synth::TokenSequence& tokens) {
    if (static_cast<int>(tokens.ids.size()) != cfg.max_tokens ||
        tokens.vocab_size != cfg.vocab_size)
        fail(ErrorCode::shape_error, "token sequence does not match model config");

    ag::Var x = ag::embedding(params["lang.tok"], tokens.ids);
    x = ag::add(x, params["lang.pos"]);

    // TokenSequence marks valid positions with 1; attention masks ignore-1.
    std::vector<std::uint8_t> mask(tokens.mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i)
        mask[i] = static_cast<std::uint8_t>(tokens.mask[i] ? 0 : 1);

    x = encoder_stack(params, "lang", x, mask, cfg.layers_lang, cfg.n_heads);
    return EmbSeq{x, std::move(mask), 0, 0};
}

EmbSeq encode_vision(ag::Graph& g, ParamBinder& params, const ModelConfig& cfg,
                     const Image& image) {
    const int p = cfg.patch_size;
    if (image.c != 3 || image.h <= 0 || image.w <= 0 || image.h % p != 0 ||
        image.w % p != 0)
        fail(ErrorCode::shape_error, "image dims not divisible by patch size");
    const int gh = image.h / p;
    const int gw = image.w / p;
    if (gh > cfg.grid() || gw > cfg.grid())
        fail(ErrorCode::shape_error, "image larger than the positional table");

    // Rows are patches in raster order; within a patch, channel-major then
    // row-major pixels, matching the Image plane layout.
    Tensor patches(gh * gw, 3 * p * p);
    for (int py = 0; py < gh; ++py)
        for (int px = 0; px < gw; ++px) {
            double* row = patches.row(py * gw + px);
            int k = 0;
            for (int ch = 0; ch < 3; ++ch)
                for (int y = 0; y < p; ++y)
                    for (int x = 0; x < p; ++x)
                        row[k++] = static_cast<double>(
                            image.at(ch, py * p + y, px * p + x));
        }

    ag::Var x = ag::add_rowvec(ag::matmul(g.leaf(std::move(patches)), params["vis.patch.w"]),
                               params["vis.patch.b"]);

    if (gh == cfg.grid() && gw == cfg.grid()) {
        x = ag::add(x, params["vis.pos"]);
    } else {
        std::vector<int> ids;
        ids.reserve(static_cast<std::size_t>(gh) * gw);
        for (int r = 0; r < gh; ++r)
            for (int c = 0; c < gw; ++c) ids.push_back(r * cfg.grid() + c);
        x = ag::add(x, ag::embedding(params["vis.pos"], ids));
    }

    std::vector<std::uint8_t> mask(static_cast<std::size_t>(gh) * gw, 0);
    x = encoder_stack(params, "vis", x, mask, cfg.layers_vis, cfg.n_heads);
    return EmbSeq{x, std::move(mask), gh, gw};
}

EmbSeq project_language(ParamBinder& params, const ModelConfig& cfg, const EmbSeq& seq) {
    if (seq.vectors.cols() != cfg.d_lang)
        fail(ErrorCode::shape_error, "language projection input width mismatch");
    ag::Var x = ag::add_rowvec(ag::matmul(seq.vectors, params["lang.proj.w"]),
                               params["lang.proj.b"]);
    return EmbSeq{x, seq.mask, seq.grid_h, seq.grid_w};
}

EmbSeq project_vision(ParamBinder& params, const ModelConfig& cfg, const EmbSeq& seq) {
    if (seq.vectors.cols() != cfg.d_vis)
        fail(ErrorCode::shape_error, "vision projection input width mismatch");
    ag::Var x = ag::add_rowvec(ag::matmul(seq.vectors, params["vis.proj.w"]),
                               params["vis.proj.b"]);
    return EmbSeq{x, seq.mask, seq.grid_h, seq.grid_w};
}

}  // namespace nltrack::model
