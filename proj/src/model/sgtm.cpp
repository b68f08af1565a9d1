#include "nltrack/model/sgtm.hpp"

#include <cmath>

#include "nltrack/common.hpp"
#include "nltrack/core/kernels.hpp"
#include "nltrack/model/head.hpp"

namespace nltrack::model {

void TemporalMemory::push(Tensor patch) {
    entries_.push_back(std::move(patch));
    while (static_cast<int>(entries_.size()) > capacity_) entries_.pop_front();
}

void register_temporal(ParamStore& store, const ModelConfig& cfg) {
    if (!cfg.has_memory()) return;
    const int slots = 1 + cfg.memory_capacity * cfg.roi_size * cfg.roi_size;
    store.add("sgtm.pos", slots, cfg.d_model, Init::gaussian());
    store.add("sgtm.query", 1, cfg.d_model, Init::gaussian());
    register_encoder_stack(store, "sgtm.enc", cfg.d_model, cfg.layers_temporal_enc,
                           cfg.ffn_ratio, ParamGroup::main);
    register_cross_stack(store, "sgtm.dec", cfg.d_model, cfg.layers_temporal_dec,
                         cfg.ffn_ratio, ParamGroup::main);
}

bool update_memory(TemporalMemory& memory, const Tensor& h_t, int grid_h, int grid_w,
                   const std::array<double, 4>& box, int roi_size) {
    for (double v : box)
        if (!std::isfinite(v)) return false;
    if (box[2] - box[0] < kDegenerateSide || box[3] - box[1] < kDegenerateSide)
        return false;
    if (h_t.rows != grid_h * grid_w)
        fail(ErrorCode::shape_error, "feature rows disagree with the grid");

    Tensor patch(roi_size * roi_size, h_t.cols);
    kernels::roi_bilinear(h_t.d.data(), grid_h, grid_w, h_t.cols, box, roi_size,
                          patch.d.data());
    memory.push(std::move(patch));
    return true;
}

ag::Var temporal_clue(ag::Graph& g, ParamBinder& params, const ModelConfig& cfg,
                      const std::vector<ag::Var>& entries,
                      const std::optional<ag::Var>& nl_cls) {
    if (!cfg.has_memory()) fail(ErrorCode::mode_error, "this flavor has no temporal memory");
    if (nl_cls.has_value() != cfg.memory_uses_cls())
        fail(ErrorCode::mode_error, "nl_cls presence disagrees with the config");
    if (entries.empty()) return g.leaf(Tensor::zeros(1, cfg.d_model));
    if (static_cast<int>(entries.size()) > cfg.memory_capacity)
        fail(ErrorCode::shape_error, "more entries than the memory capacity");

    const int block = cfg.roi_size * cfg.roi_size;
    std::vector<ag::Var> parts;
    // Positional slots: row 0 is the CLS slot; entries fill rows 1.. in
    // sequence order, so a partially filled memory uses a stable layout.
    std::vector<int> pos_ids;
    if (nl_cls) {
        parts.push_back(*nl_cls);
        pos_ids.push_back(0);
    }
    for (const ag::Var& e : entries) {
        if (e.rows() != block || e.cols() != cfg.d_model)
            fail(ErrorCode::shape_error, "memory entry shape disagrees with the config");
        parts.push_back(e);
    }
    for (int i = 0; i < static_cast<int>(entries.size()) * block; ++i)
        pos_ids.push_back(1 + i);

    ag::Var x = ag::concat_rows(parts);
    x = ag::add(x, ag::embedding(params["sgtm.pos"], pos_ids));
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(x.rows()), 0);
    x = encoder_stack(params, "sgtm.enc", x, mask, cfg.layers_temporal_enc, cfg.n_heads);
    return cross_stack(params, "sgtm.dec", params["sgtm.query"], x, mask,
                       cfg.layers_temporal_dec, cfg.n_heads);
}

}  // namespace nltrack::model
