#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nltrack/cli/runconfig.hpp"

namespace nltrack::cli {

// Command bodies, shared by the binary and the contract tests. All throw
// Error; the binary converts that to a one-line stderr message and a nonzero
// exit. Every file written carries the config hash.

// Materializes eval.sequences sequences (seeds data.seed + i) plus the
// config provenance file.
void cmd_synth(const RunConfig& cfg, const std::string& out_dir);

// Trains a fresh model on virtual episodes and writes a checkpoint embedding
// the full config; optional step log file, optional live echo to stdout.
void cmd_train(const RunConfig& cfg, const std::string& checkpoint_path,
               const std::string& log_path, bool echo);

// Scores a materialized dataset with a checkpointed model under the
// configured protocol; writes report.txt, report.json and the two curve
// plots into out_dir. The checkpoint's model.* section must match the
// command config verbatim; the dataset must come from the configured world.
eval::MetricsReport cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path,
                             const std::string& dataset_dir, const std::string& out_dir);

// Grounds one description in one image; writes a box record and, when a path
// is given, the image with the box burned in. Returns the predicted box.
pipeline::Box cmd_ground(const std::string& checkpoint_path, const std::string& image_path,
                         const std::string& text, const std::string& record_path,
                         const std::string& annotated_path);

// Tracks through a directory of .ppm frames (sorted by filename). With an
// initial box the run is recorded as NL_BB, otherwise grounding initializes
// it (NL_ONLY). Writes boxes.txt plus one annotated frame per input.
void cmd_track(const std::string& checkpoint_path, const std::string& frames_dir,
               const std::string& text, const std::optional<pipeline::Box>& init_box,
               const std::string& out_dir);

struct AblateRow {
    model::Flavor flavor;
    double auc = 0.0;
    double precision = 0.0;
};

// Trains and evaluates every flavor on the same split; writes the table and
// returns it (flavor order: seprm, msrm, msrm-tdec, msrm-tm, full).
std::vector<AblateRow> cmd_ablate(const RunConfig& cfg, const std::string& out_path,
                                  bool echo);

}  // namespace nltrack::cli
