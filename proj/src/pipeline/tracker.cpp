#include "nltrack/pipeline/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "nltrack/common.hpp"

namespace nltrack::pipeline {

namespace {

void require_native_frame(const model::ModelConfig& cfg, const Image& frame) {
    if (frame.c != 3 || frame.h != cfg.frame_size || frame.w != cfg.frame_size)
        fail(ErrorCode::shape_error, "frame does not match the model's test resolution");
}

}  // namespace

GroundingOutcome ground(const model::JointModel& m, const synth::TokenSequence& tokens,
                        const Image& frame) {
    require_native_frame(m.config(), frame);
    ag::Graph g;
    ParamBinder params(g, m.store(), false);
    model::ForwardResult r = m.ground(g, params, tokens, frame);
    return {r.box.box(), r.box.degenerate, r.rel.h_t.vectors.val()};
}

TrackerState init_state(const model::JointModel& m, const synth::TokenSequence& tokens,
                        const Image& frame, const std::optional<Box>& given_box,
                        double template_context, double search_context) {
    const model::ModelConfig& cfg = m.config();
    require_native_frame(cfg, frame);
    if (given_box && !box_valid(*given_box))
        fail(ErrorCode::degenerate_box, "initial box has a non-positive side");

    Box box{};
    std::optional<GroundingOutcome> gr;
    if (!given_box || cfg.has_memory()) gr = ground(m, tokens, frame);
    if (given_box) {
        box = *given_box;
    } else {
        if (gr->degenerate)
            fail(ErrorCode::init_failed,
                 "grounding collapsed and no initial box was given");
        box = gr->box;
    }

    TrackerState st;
    st.tokens = tokens;
    st.search_context = search_context;
    Crop tc = crop_template(frame, box, template_context, cfg.template_size);
    st.template_emb = m.encode_template(tc.image);
    st.memory = model::TemporalMemory(cfg.memory_capacity);
    if (cfg.has_memory())
        model::update_memory(st.memory, gr->h_t, cfg.grid(), cfg.grid(), box,
                             cfg.roi_size);
    st.last_box = box;
    st.frame_index = 1;
    st.initialized = true;
    return st;
}

FrameOutcome track_frame(const model::JointModel& m, TrackerState& state,
                         const Image& frame) {
    if (!state.initialized)
        fail(ErrorCode::mode_error, "tracker state was not initialized");
    const model::ModelConfig& cfg = m.config();
    require_native_frame(cfg, frame);

    Crop sc = crop_search(frame, state.last_box, state.search_context, cfg.frame_size);

    ag::Graph g;
    ParamBinder params(g, m.store(), false);
    std::vector<ag::Var> mem;
    if (cfg.has_memory())
        for (const Tensor& e : state.memory.entries()) mem.push_back(g.leaf(e));
    model::ForwardResult r =
        m.track_cached(g, params, state.tokens, state.template_emb, sc.image, mem);

    ++state.frame_index;
    if (r.box.degenerate) return {state.last_box, true};

    Box crop_box = r.box.box();
    Box frame_box = clamp_unit(map_box_to_frame(crop_box, sc.params));
    if (!box_valid(frame_box)) return {state.last_box, true};

    if (cfg.has_memory())
        model::update_memory(state.memory, r.rel.h_t.vectors.val(), cfg.grid(),
                             cfg.grid(), crop_box, cfg.roi_size);
    state.last_box = frame_box;
    return {frame_box, false};
}

}  // namespace nltrack::pipeline
