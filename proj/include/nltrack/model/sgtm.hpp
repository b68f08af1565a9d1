#pragma once

#include <array>
#include <deque>
#include <optional>

#include "nltrack/model/blocks.hpp"
#include "nltrack/model/config.hpp"

namespace nltrack::model {

// FIFO of pooled target-patch blocks, each [r*r, d_model], oldest first.
// Entries are stored as plain values; the training path bypasses the buffer
// and feeds a graph-attached entry directly to temporal_clue.
class TemporalMemory {
public:
    explicit TemporalMemory(int capacity) : capacity_(capacity) {}

    void push(Tensor patch);
    void clear() { entries_.clear(); }
    int size() const { return static_cast<int>(entries_.size()); }
    int capacity() const { return capacity_; }
    bool empty() const { return entries_.empty(); }
    const std::deque<Tensor>& entries() const { return entries_; }

private:
    int capacity_;
    std::deque<Tensor> entries_;
};

void register_temporal(ParamStore& store, const ModelConfig& cfg);

// Pools an r x r patch of the test features under the box and pushes it;
// degenerate or non-finite boxes leave the memory unchanged. Returns whether
// a push happened.
bool update_memory(TemporalMemory& memory, const Tensor& h_t, int grid_h, int grid_w,
                   const std::array<double, 4>& box, int roi_size);

// Self-attention over [nl_cls?, entries...] then cross-attention from the
// learnable temporal query. Empty entries short-circuit to an exact zero
// vector so a fresh tracker matches the grounding-mode query bit for bit.
// nl_cls must be present exactly when the config says the memory uses it.
ag::Var temporal_clue(ag::Graph& g, ParamBinder& params, const ModelConfig& cfg,
                      const std::vector<ag::Var>& entries,
                      const std::optional<ag::Var>& nl_cls);

}  // namespace nltrack::model
