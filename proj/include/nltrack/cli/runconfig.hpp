#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nltrack/eval/evaluate.hpp"
#include "nltrack/model/config.hpp"
#include "nltrack/pipeline/train.hpp"
#include "nltrack/synth/world.hpp"

namespace nltrack::cli {

// Everything a run needs, addressable through a flat key=value schema. The
// canonical serialization (sorted keys, one per line) travels inside every
// checkpoint, dataset, report and plot this tool writes, and its hash is the
// provenance stamp tying artifacts back to their settings.
struct RunConfig {
    synth::WorldConfig world;
    model::ModelConfig model;
    pipeline::TrainConfig train;
    eval::Protocol protocol = eval::Protocol::nl_only;
    double threshold_px = eval::kPrecisionThresholdPx;
    int eval_sequences = 32;          // dataset size for synth/ablate
    std::uint64_t data_seed = 1;      // first sequence seed; sequence i uses data_seed + i
    std::uint64_t init_seed = 1;      // fresh-model weight initialization
    int threads = 1;                  // kernel parallelism; 1 = fully deterministic
};

// Sorted list of every recognized key.
const std::vector<std::string>& config_keys();

// Unknown keys are config_invalid; malformed values are parse_error.
void set_key(RunConfig& c, const std::string& key, const std::string& value);
std::string get_key(const RunConfig& c, const std::string& key);

std::string to_text(const RunConfig& c);  // canonical key=value lines
RunConfig parse_config(const std::string& text);

// Config file (optional; empty path = defaults) plus key=value overrides,
// applied in order so later settings win.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

std::uint64_t config_hash(const RunConfig& c);
std::string hash_hex(std::uint64_t h);

// The model.* keys alone; a checkpoint is only loadable into a command whose
// architecture section matches it verbatim.
std::string architecture_text(const RunConfig& c);

}  // namespace nltrack::cli
