#pragma once

#include <optional>

#include "nltrack/model/joint.hpp"
#include "nltrack/pipeline/crop.hpp"

namespace nltrack::pipeline {

struct GroundingOutcome {
    Box box;          // clamped, frame-normalized
    bool degenerate;  // raw prediction had a collapsed side
    Tensor h_t;       // relation output over the frame grid, for memory seeding
};

// Full-frame grounding forward on a throwaway graph. The frame must match the
// model's native test resolution.
GroundingOutcome ground(const model::JointModel& m, const synth::TokenSequence& tokens,
                        const Image& frame);

// Per-sequence tracking state. tokens and template_emb are fixed at
// initialization; tracking a frame only advances memory, last_box and
// frame_index.
struct TrackerState {
    synth::TokenSequence tokens;
    Tensor template_emb;  // encoded once, replayed as a constant
    model::TemporalMemory memory{1};
    Box last_box{};
    int frame_index = 0;
    double search_context = kSearchContext;
    bool initialized = false;
};

struct FrameOutcome {
    Box box;          // frame-normalized; the previous box when degenerate
    bool degenerate;  // prediction collapsed, state frozen for this frame
};

// Initialize from the first frame. Without a given box the target is located
// by grounding (init_failed if that prediction is degenerate); with one, the
// box is taken as-is and grounding only runs when the flavor needs its
// features to seed the temporal memory.
TrackerState init_state(const model::JointModel& m, const synth::TokenSequence& tokens,
                        const Image& frame, const std::optional<Box>& given_box,
                        double template_context = kTemplateContext,
                        double search_context = kSearchContext);

// One tracking step: crop the search region around the last box, run the
// tracking forward, map the prediction back to frame coordinates. Degenerate
// predictions keep the previous box and leave the memory untouched.
FrameOutcome track_frame(const model::JointModel& m, TrackerState& state,
                         const Image& frame);

}  // namespace nltrack::pipeline
