// Command-line workbench: synthesize benchmarks, train, evaluate, ground,
// track and ablate, all reproducible from (config, seed) alone.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nltrack/cli/commands.hpp"
#include "nltrack/core/kernels.hpp"

namespace {

using nltrack::pipeline::Box;

Box parse_box_arg(const std::string& v) {
    Box b{};
    int consumed = 0;
    if (std::sscanf(v.c_str(), "%lf,%lf,%lf,%lf%n", &b[0], &b[1], &b[2], &b[3], &consumed) != 4 ||
        consumed != static_cast<int>(v.size()))
        nltrack::fail(nltrack::ErrorCode::parse_error,
                      "--init-box expects x1,y1,x2,y2 in normalized coordinates");
    return b;
}

// Thread count for commands that carry no config: the environment variable
// or the deterministic default.
int env_threads() {
    const char* v = std::getenv("NLTRACK_THREADS");
    if (!v) return 1;
    int n = std::atoi(v);
    if (n < 1)
        nltrack::fail(nltrack::ErrorCode::config_invalid,
                      "NLTRACK_THREADS must be a positive integer");
    return n;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace nltrack;

    CLI::App app{"joint natural-language grounding and tracking workbench"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    std::string out, checkpoint, data_dir, log_path, image_path, text, annotated, init_box_arg;

    auto add_config_opts = [&](CLI::App* sc) {
        sc->add_option("--config", config_path, "key=value config file");
        sc->add_option("--set", sets, "override one setting, e.g. --set train.steps=100");
    };

    CLI::App* synth = app.add_subcommand("synth", "materialize an evaluation dataset");
    add_config_opts(synth);
    synth->add_option("--out", out, "dataset directory")->required();

    CLI::App* train = app.add_subcommand("train", "train a model on virtual episodes");
    add_config_opts(train);
    train->add_option("--out", out, "checkpoint file")->required();
    train->add_option("--log", log_path, "step log file");

    CLI::App* eval_cmd = app.add_subcommand("eval", "score a checkpoint on a dataset");
    add_config_opts(eval_cmd);
    eval_cmd->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
    eval_cmd->add_option("--data", data_dir, "dataset directory")->required();
    eval_cmd->add_option("--out", out, "report directory")->required();

    CLI::App* ground = app.add_subcommand("ground", "locate a described target in one image");
    ground->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
    ground->add_option("--image", image_path, "PPM (P6) image at the model's frame size")
        ->required();
    ground->add_option("--text", text, "target description")->required();
    ground->add_option("--out", out, "box record file")->required();
    ground->add_option("--annotated", annotated, "write the image with the box burned in");

    CLI::App* track = app.add_subcommand("track", "track a described target through frames");
    track->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
    track->add_option("--frames", data_dir, "directory of .ppm frames, filename order")
        ->required();
    track->add_option("--text", text, "target description")->required();
    track->add_option("--init-box", init_box_arg, "first-frame box x1,y1,x2,y2 (NL_BB)");
    track->add_option("--out", out, "output directory")->required();

    CLI::App* ablate = app.add_subcommand("ablate", "train and score every flavor");
    add_config_opts(ablate);
    ablate->add_option("--out", out, "table file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        // The environment may set a thread count; explicit --set wins.
        if (const char* v = std::getenv("NLTRACK_THREADS"))
            sets.insert(sets.begin(), std::string("threads=") + v);

        if (synth->parsed()) {
            cli::cmd_synth(cli::load_config(config_path, sets), out);
        } else if (train->parsed()) {
            cli::cmd_train(cli::load_config(config_path, sets), out, log_path, true);
        } else if (eval_cmd->parsed()) {
            auto r = cli::cmd_eval(cli::load_config(config_path, sets), checkpoint, data_dir, out);
            std::printf("auc %.6f precision %.6f grounding_acc %.6f failures %d/%d\n", r.auc,
                        r.precision, r.grounding_acc, r.failures, r.sequences);
        } else if (ground->parsed()) {
            kernels::set_threads(env_threads());
            Box b = cli::cmd_ground(checkpoint, image_path, text, out, annotated);
            std::printf("0 %.6f %.6f %.6f %.6f\n", b[0], b[1], b[2], b[3]);
        } else if (track->parsed()) {
            kernels::set_threads(env_threads());
            std::optional<Box> init;
            if (!init_box_arg.empty()) init = parse_box_arg(init_box_arg);
            cli::cmd_track(checkpoint, data_dir, text, init, out);
        } else if (ablate->parsed()) {
            cli::cmd_ablate(cli::load_config(config_path, sets), out, true);
        }
    } catch (const Error& e) {
        std::cerr << e.one_line() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
