#include "nltrack/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "nltrack/cli/ppm.hpp"
#include "nltrack/core/kernels.hpp"
#include "nltrack/core/params.hpp"
#include "nltrack/eval/plot.hpp"
#include "nltrack/pipeline/tracker.hpp"
#include "nltrack/synth/dataset.hpp"

namespace nltrack::cli {

namespace {

namespace fs = std::filesystem;

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io_error, "cannot write '" + path + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorCode::io_error, "short write to '" + path + "'");
}

std::string hash_line(const RunConfig& cfg) {
    return "config_hash=" + hash_hex(config_hash(cfg)) + "\n";
}

// Rebuilds the model a checkpoint was trained with, weights restored.
model::JointModel load_model(const std::string& checkpoint_path, RunConfig& out_cfg) {
    LoadedCheckpoint loaded = read_checkpoint(checkpoint_path);
    out_cfg = parse_config(loaded.config_text);
    model::JointModel m(out_cfg.model, out_cfg.init_seed);
    load_checkpoint_into(checkpoint_path, m.store(), nullptr);
    return m;
}

std::string box_record(int frame_index, const pipeline::Box& b) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f %.6f\n", frame_index, b[0], b[1],
                  b[2], b[3]);
    return buf;
}

void write_curve_plot(const std::string& path, const RunConfig& cfg,
                      const std::string& title, const std::string& x_label,
                      const std::vector<double>& xs, const eval::Curve& curve,
                      const std::string& series_name) {
    eval::Series s;
    s.name = series_name;
    s.xs = xs;
    s.ys.assign(curve.begin(), curve.end());
    const std::string svg = "<!-- config_hash=" + hash_hex(config_hash(cfg)) + " -->\n" +
                            eval::render_line_plot(title, x_label, "fraction of frames", {s});
    write_text_file(path, svg);
}

}  // namespace

void cmd_synth(const RunConfig& cfg, const std::string& out_dir) {
    synth::validate(cfg.world);
    if (cfg.eval_sequences < 1)
        fail(ErrorCode::config_invalid, "eval.sequences must be >= 1");
    std::vector<synth::SequenceSample> samples;
    samples.reserve(static_cast<std::size_t>(cfg.eval_sequences));
    for (int i = 0; i < cfg.eval_sequences; ++i)
        samples.push_back(synth::generate_sequence(cfg.world, cfg.data_seed + i));
    synth::write_dataset(samples, out_dir);
    write_text_file(out_dir + "/config.txt", hash_line(cfg) + to_text(cfg));
}

void cmd_train(const RunConfig& cfg, const std::string& checkpoint_path,
               const std::string& log_path, bool echo) {
    kernels::set_threads(cfg.threads);
    model::JointModel m(cfg.model, cfg.init_seed);
    std::string log = hash_line(cfg);
    log += "step ground_loss track_loss total_loss lr grad_norm\n";
    pipeline::train(m, cfg.world, cfg.train, [&](const pipeline::StepLog& s) {
        char line[192];
        std::snprintf(line, sizeof line, "%d %.6f %.6f %.6f %.8f %.6f\n", s.step,
                      s.ground_loss, s.track_loss, s.total_loss, s.lr, s.grad_norm);
        log += line;
        if (echo) {
            std::fputs(line, stdout);
            std::fflush(stdout);
        }
    });
    save_checkpoint(checkpoint_path, to_text(cfg), m.store());
    if (!log_path.empty()) write_text_file(log_path, log);
}

eval::MetricsReport cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path,
                             const std::string& dataset_dir, const std::string& out_dir) {
    kernels::set_threads(cfg.threads);
    std::vector<synth::SequenceSample> ds = synth::read_dataset(dataset_dir);
    const std::uint64_t world_hash = cfg.world.hash();
    for (const synth::SequenceSample& s : ds)
        if (s.config_hash != world_hash)
            fail(ErrorCode::config_invalid,
                 "dataset '" + dataset_dir + "' was generated from a different world config");

    RunConfig ck;
    model::JointModel m = load_model(checkpoint_path, ck);
    if (architecture_text(ck) != architecture_text(cfg))
        fail(ErrorCode::incompatible_checkpoint,
             "checkpoint '" + checkpoint_path + "' was trained with a different model section");

    eval::MetricsReport r = eval::evaluate(m, ds, cfg.protocol, cfg.threshold_px);

    fs::create_directories(out_dir);
    write_text_file(out_dir + "/report.txt", hash_line(cfg) + eval::report_text(r));

    nlohmann::json j = nlohmann::json::parse(eval::report_json(r));
    j["config_hash"] = hash_hex(config_hash(cfg));
    write_text_file(out_dir + "/report.json", j.dump(2) + "\n");

    std::vector<double> overlap_x, error_x;
    const double t = eval::scaled_precision_threshold(cfg.threshold_px, r.frame_px);
    for (int i = 0; i < eval::kSuccessPoints; ++i) {
        overlap_x.push_back(i * 0.05);
        error_x.push_back(t * i / 10.0);
    }
    const std::string series = eval::protocol_name(r.protocol);
    write_curve_plot(out_dir + "/success_plot.svg", cfg, "Success plot",
                     "overlap threshold", overlap_x, r.success, series);
    write_curve_plot(out_dir + "/precision_plot.svg", cfg, "Precision plot",
                     "center error threshold (px)", error_x, r.precision_points, series);
    return r;
}

pipeline::Box cmd_ground(const std::string& checkpoint_path, const std::string& image_path,
                         const std::string& text, const std::string& record_path,
                         const std::string& annotated_path) {
    RunConfig ck;
    model::JointModel m = load_model(checkpoint_path, ck);
    Image img = read_ppm(image_path);
    if (img.h != m.config().frame_size || img.w != m.config().frame_size)
        fail(ErrorCode::shape_error,
             "'" + image_path + "' is " + std::to_string(img.w) + "x" + std::to_string(img.h) +
                 " but the model grounds " + std::to_string(m.config().frame_size) +
                 "px frames");
    synth::TokenSequence tokens = synth::tokenize(text);
    pipeline::GroundingOutcome g = pipeline::ground(m, tokens, img);

    std::string record = hash_line(ck);
    record += "protocol=GROUNDING\n";
    record += "text=" + text + "\n";
    record += "degenerate=" + std::string(g.degenerate ? "1" : "0") + "\n";
    record += box_record(0, g.box);
    write_text_file(record_path, record);

    if (!annotated_path.empty()) {
        draw_box(img, g.box, 1.0f, 1.0f, 1.0f);
        write_ppm(annotated_path, img);
    }
    return g.box;
}

void cmd_track(const std::string& checkpoint_path, const std::string& frames_dir,
               const std::string& text, const std::optional<pipeline::Box>& init_box,
               const std::string& out_dir) {
    RunConfig ck;
    model::JointModel m = load_model(checkpoint_path, ck);

    std::vector<std::string> frame_files;
    std::error_code ec;
    for (const fs::directory_entry& e : fs::directory_iterator(frames_dir, ec))
        if (e.is_regular_file() && e.path().extension() == ".ppm")
            frame_files.push_back(e.path().string());
    if (ec) fail(ErrorCode::io_error, "cannot list '" + frames_dir + "'");
    if (frame_files.empty())
        fail(ErrorCode::io_error, "no .ppm frames in '" + frames_dir + "'");
    std::sort(frame_files.begin(), frame_files.end());

    synth::TokenSequence tokens = synth::tokenize(text);
    fs::create_directories(out_dir);

    std::string records = hash_line(ck);
    records += std::string("protocol=") + (init_box ? "NL_BB" : "NL_ONLY") + "\n";
    records += "text=" + text + "\n";

    pipeline::TrackerState st;
    for (int t = 0; t < static_cast<int>(frame_files.size()); ++t) {
        Image img = read_ppm(frame_files[t]);
        pipeline::Box b;
        if (t == 0) {
            st = pipeline::init_state(m, tokens, img, init_box);
            b = st.last_box;
        } else {
            b = pipeline::track_frame(m, st, img).box;
        }
        records += box_record(t, b);
        draw_box(img, b, 1.0f, 1.0f, 1.0f);
        char name[32];
        std::snprintf(name, sizeof name, "/frame_%06d.ppm", t);
        write_ppm(out_dir + name, img);
    }
    write_text_file(out_dir + "/boxes.txt", records);
}

std::vector<AblateRow> cmd_ablate(const RunConfig& cfg, const std::string& out_path,
                                  bool echo) {
    kernels::set_threads(cfg.threads);
    synth::validate(cfg.world);
    if (cfg.eval_sequences < 1)
        fail(ErrorCode::config_invalid, "eval.sequences must be >= 1");

    std::vector<synth::SequenceSample> ds;
    ds.reserve(static_cast<std::size_t>(cfg.eval_sequences));
    for (int i = 0; i < cfg.eval_sequences; ++i)
        ds.push_back(synth::generate_sequence(cfg.world, cfg.data_seed + i));

    std::string table = hash_line(cfg);
    table += "flavor auc precision\n";
    std::vector<AblateRow> rows;
    for (model::Flavor f : {model::Flavor::seprm, model::Flavor::msrm,
                            model::Flavor::msrm_tdec, model::Flavor::msrm_tm,
                            model::Flavor::full}) {
        RunConfig fc = cfg;
        fc.model.flavor = f;
        model::JointModel m(fc.model, fc.init_seed);
        pipeline::train(m, fc.world, fc.train, [](const pipeline::StepLog&) {});
        eval::MetricsReport r = eval::evaluate(m, ds, cfg.protocol, cfg.threshold_px);
        rows.push_back({f, r.auc, r.precision});

        char line[96];
        std::snprintf(line, sizeof line, "%s %.6f %.6f\n", get_key(fc, "model.flavor").c_str(),
                      r.auc, r.precision);
        table += line;
        if (echo) {
            std::fputs(line, stdout);
            std::fflush(stdout);
        }
    }
    write_text_file(out_path, table);
    return rows;
}

}  // namespace nltrack::cli
