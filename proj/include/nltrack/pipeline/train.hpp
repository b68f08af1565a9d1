#pragma once

#include <functional>

#include "nltrack/model/joint.hpp"
#include "nltrack/pipeline/box.hpp"
#include "nltrack/pipeline/optim.hpp"
#include "nltrack/synth/world.hpp"

namespace nltrack::pipeline {

// One training sample: a full grounding frame plus a search patch already
// cropped around a jittered ground-truth anchor from a later frame of the
// same episode, with its target box in patch coordinates.
struct TrainSample {
    synth::TokenSequence tokens;
    Image ground_frame;
    Box ground_gt{};
    Image search_patch;
    Box search_gt{};
};

struct TrainConfig {
    int steps = 2000;
    int batch_size = 8;
    double lr = 1e-3;
    int warmup_steps = 200;
    double encoder_lr_scale = 0.1;
    double lambda_giou = 2.0;
    double lambda_l1 = 5.0;
    double clip_norm = 5.0;
    // Search-patch center offset drawn from +-jitter, as a fraction of the
    // crop side, so the target is not always dead-center at train time.
    double center_jitter = 0.1;
    std::uint64_t seed = 1;
    int overfit_samples = 0;  // > 0: cycle this many fixed samples instead
    int log_every = 50;
};

struct StepLog {
    int step = 0;
    double ground_loss = 0.0;
    double track_loss = 0.0;
    double total_loss = 0.0;
    double lr = 0.0;
    double grad_norm = 0.0;  // pre-clip
};

// Deterministic in (world, model config, seed): episode synthesis, frame pair
// choice and jitter all derive from the given seed.
TrainSample make_train_sample(const synth::WorldConfig& world,
                              const model::ModelConfig& mcfg, std::uint64_t seed,
                              double center_jitter);

// Both-stage step over one batch on a single graph per sample: grounding loss
// on the full frame, then a tracking loss on the search patch using a
// template cropped around the predicted (stop-gradient) grounding box, with
// the ground truth as fallback when that prediction collapses. Memory-bearing
// flavors feed one graph-attached pooled entry so the clue path trains.
// Throws nonfinite_loss if any loss stops being finite.
StepLog train_step(model::JointModel& m, Adam& opt,
                   const std::vector<TrainSample>& batch, int step, double lr,
                   const TrainConfig& cfg);

using LogFn = std::function<void(const StepLog&)>;

void train(model::JointModel& m, const synth::WorldConfig& world,
           const TrainConfig& cfg, const LogFn& log);

}  // namespace nltrack::pipeline
