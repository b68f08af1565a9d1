#pragma once

#include <string>
#include <vector>

#include "nltrack/synth/world.hpp"

namespace nltrack::synth {

// On-disk layout: <dir>/index.jsonl with one record per sample (version,
// seed, config hash, description, token ids, per-frame boxes as 4 decimal
// numbers, out-of-view flags, frame blob name) and one NLTFRAME blob per
// sample (magic, u32 version/T/C/H/W, float32 little-endian planes).
// Round-trips are bit-exact.
void write_dataset(const std::vector<SequenceSample>& samples, const std::string& dir);
std::vector<SequenceSample> read_dataset(const std::string& dir);

// Blob-level helpers, exposed for targeted corruption tests.
void write_frames_blob(const std::vector<Image>& frames, const std::string& path);
std::vector<Image> read_frames_blob(const std::string& path);

}  // namespace nltrack::synth
