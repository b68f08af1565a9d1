#include "nltrack/pipeline/train.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "nltrack/common.hpp"
#include "nltrack/core/rng.hpp"
#include "nltrack/pipeline/crop.hpp"

namespace nltrack::pipeline {

namespace {

constexpr std::uint64_t kSampleSalt = 0x73616d706c65ull;  // sample stream
constexpr std::uint64_t kJitterSalt = 0x6a6974746572ull;  // jitter stream

void require_matched_sizes(const synth::WorldConfig& world,
                           const model::ModelConfig& mcfg) {
    if (world.frame_size != mcfg.frame_size)
        fail(ErrorCode::config_invalid,
             "world frame size does not match the model's test resolution");
}

}  // namespace

TrainSample make_train_sample(const synth::WorldConfig& world,
                              const model::ModelConfig& mcfg, std::uint64_t seed,
                              double center_jitter) {
    require_matched_sizes(world, mcfg);
    synth::Episode ep = synth::build_episode(world, seed);

    std::vector<int> visible;
    std::vector<synth::GtBox> gt(static_cast<std::size_t>(world.num_frames));
    for (int t = 0; t < world.num_frames; ++t) {
        gt[static_cast<std::size_t>(t)] = synth::gt_box(ep, t);
        if (!gt[static_cast<std::size_t>(t)].out_of_view) visible.push_back(t);
    }
    if (visible.size() < 2)
        fail(ErrorCode::degenerate_box,
             "episode has fewer than two frames with a visible target");

    Rng rng(splitmix64(seed ^ kJitterSalt));
    int gi = rng.uniform_int(static_cast<int>(visible.size()) - 1);
    int ti = gi + 1 + rng.uniform_int(static_cast<int>(visible.size()) - 1 - gi);
    int g_frame = visible[static_cast<std::size_t>(gi)];
    int t_frame = visible[static_cast<std::size_t>(ti)];

    TrainSample s;
    s.tokens = synth::tokenize(ep.description);
    s.ground_frame = synth::render_frame(ep, g_frame);
    s.ground_gt = gt[static_cast<std::size_t>(g_frame)].box;

    Box target = gt[static_cast<std::size_t>(t_frame)].box;
    double side = std::min(
        1.0, kSearchContext * std::sqrt((target[2] - target[0]) * (target[3] - target[1])));
    double dx = rng.uniform(-center_jitter, center_jitter) * side;
    double dy = rng.uniform(-center_jitter, center_jitter) * side;
    Box anchor{target[0] + dx, target[1] + dy, target[2] + dx, target[3] + dy};

    Image frame_t = synth::render_frame(ep, t_frame);
    Crop sc = crop_search(frame_t, anchor, kSearchContext, mcfg.frame_size);
    s.search_patch = std::move(sc.image);
    s.search_gt = clamp_unit(map_box_to_crop(target, sc.params));
    if (!box_valid(s.search_gt))
        fail(ErrorCode::degenerate_box, "target left the jittered search window");
    return s;
}

StepLog train_step(model::JointModel& m, Adam& opt,
                   const std::vector<TrainSample>& batch, int step, double lr,
                   const TrainConfig& cfg) {
    if (batch.empty()) fail(ErrorCode::config_invalid, "empty training batch");
    const model::ModelConfig& mcfg = m.config();

    std::vector<Tensor> grads(static_cast<std::size_t>(m.store().count()));
    StepLog log;
    log.step = step;
    log.lr = lr;

    for (std::size_t bi = 0; bi < batch.size(); ++bi) {
        const TrainSample& s = batch[bi];
        ag::Graph g;
        ParamBinder params(g, m.store(), true);

        model::ForwardResult gr = m.ground(g, params, s.tokens, s.ground_frame);
        ag::Var gt_g = g.leaf(Tensor::row4(s.ground_gt[0], s.ground_gt[1],
                                           s.ground_gt[2], s.ground_gt[3]));
        ag::Var loss_g =
            box_loss(gr.box.raw, gr.box.clamped, gt_g, cfg.lambda_giou, cfg.lambda_l1);
        double lg = loss_g.val().d[0];
        if (!std::isfinite(lg))
            fail(ErrorCode::nonfinite_loss, "step " + std::to_string(step) + " sample " +
                                                std::to_string(bi) +
                                                ": grounding loss is not finite");

        // The template crop reads predicted pixels, not graph values, so no
        // gradient flows through the box used to cut it. Collapsed or
        // non-finite predictions fall back to the ground truth.
        Box pbox = gr.box.box();
        Box tbox = (gr.box.degenerate || !box_valid(pbox)) ? s.ground_gt : pbox;
        Crop tc = crop_template(s.ground_frame, tbox, kTemplateContext,
                                mcfg.template_size);

        std::vector<ag::Var> memory;
        if (mcfg.has_memory())
            memory.push_back(ag::roi_bilinear(gr.rel.h_t.vectors, mcfg.grid(),
                                              mcfg.grid(), tbox, mcfg.roi_size));

        model::ForwardResult tr =
            m.track(g, params, s.tokens, tc.image, s.search_patch, memory);
        ag::Var gt_t = g.leaf(Tensor::row4(s.search_gt[0], s.search_gt[1],
                                           s.search_gt[2], s.search_gt[3]));
        ag::Var loss_t =
            box_loss(tr.box.raw, tr.box.clamped, gt_t, cfg.lambda_giou, cfg.lambda_l1);

        ag::Var total = ag::add(loss_g, loss_t);
        double lt = loss_t.val().d[0];
        if (!std::isfinite(lt))
            fail(ErrorCode::nonfinite_loss, "step " + std::to_string(step) + " sample " +
                                                std::to_string(bi) +
                                                ": tracking loss is not finite");

        g.backward(total);
        params.export_grads(grads);
        log.ground_loss += lg;
        log.track_loss += lt;
    }

    double inv = 1.0 / static_cast<double>(batch.size());
    for (Tensor& t : grads)
        for (double& v : t.d) v *= inv;
    log.ground_loss *= inv;
    log.track_loss *= inv;
    log.total_loss = log.ground_loss + log.track_loss;
    log.grad_norm = clip_global_norm(grads, cfg.clip_norm);

    opt.step(m.store(), grads, lr, cfg.encoder_lr_scale);
    return log;
}

void train(model::JointModel& m, const synth::WorldConfig& world,
           const TrainConfig& cfg, const LogFn& log) {
    if (cfg.steps <= 0 || cfg.batch_size <= 0)
        fail(ErrorCode::config_invalid, "training needs positive steps and batch size");
    require_matched_sizes(world, m.config());
    synth::validate(world);

    std::uint64_t base = splitmix64(cfg.seed ^ kSampleSalt);
    std::vector<TrainSample> fixed;
    for (int i = 0; i < cfg.overfit_samples; ++i)
        fixed.push_back(make_train_sample(world, m.config(),
                                          base + static_cast<std::uint64_t>(i),
                                          cfg.center_jitter));

    Adam opt;
    std::uint64_t drawn = 0;
    for (int step = 0; step < cfg.steps; ++step) {
        std::vector<TrainSample> batch;
        batch.reserve(static_cast<std::size_t>(cfg.batch_size));
        for (int i = 0; i < cfg.batch_size; ++i) {
            if (!fixed.empty()) {
                std::size_t idx = static_cast<std::size_t>(
                    (static_cast<std::uint64_t>(step) * cfg.batch_size + i) %
                    fixed.size());
                batch.push_back(fixed[idx]);
            } else {
                batch.push_back(
                    make_train_sample(world, m.config(), base + drawn, cfg.center_jitter));
                ++drawn;
            }
        }
        double rate = lr_at(cfg.lr, step, cfg.steps, cfg.warmup_steps);
        StepLog rec = train_step(m, opt, batch, step, rate, cfg);
        if (log && (cfg.log_every <= 1 || step % cfg.log_every == 0 ||
                    step == cfg.steps - 1))
            log(rec);
    }
}

}  // namespace nltrack::pipeline
