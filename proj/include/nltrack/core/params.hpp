#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "nltrack/core/autograd.hpp"
#include "nltrack/core/tensor.hpp"

namespace nltrack {

// Learning-rate group: text/vision feature encoders train at a reduced rate
// relative to everything else.
enum class ParamGroup : std::uint8_t { encoder = 0, main = 1 };

struct Init {
    enum Kind { zeros, ones, normal } kind = normal;
    double stddev = 0.02;

    static Init zero() { return {zeros, 0.0}; }
    static Init one() { return {ones, 0.0}; }
    static Init gaussian(double sd = 0.02) { return {normal, sd}; }
};

// Registration-ordered named parameter table. Initialization derives each
// tensor's stream from (seed, name) alone, so values do not depend on
// registration order or on which other parameters exist.
class ParamStore {
public:
    struct Entry {
        std::string name;
        Tensor value;
        Init init;
        ParamGroup group;
    };

    int add(const std::string& name, int rows, int cols, Init init,
            ParamGroup group = ParamGroup::main);
    int index_of(const std::string& name) const;  // -1 when absent
    int count() const { return static_cast<int>(entries_.size()); }
    Entry& entry(int i) { return entries_[static_cast<std::size_t>(i)]; }
    const Entry& entry(int i) const { return entries_[static_cast<std::size_t>(i)]; }
    std::uint64_t scalar_count() const;

    void initialize(std::uint64_t seed);

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, int> by_name_;
};

// Per-graph binding of store entries to leaf nodes. Each parameter becomes at
// most one leaf per graph, so every use of a shared weight accumulates into
// the same gradient. The touched list records which parameters a forward
// actually read.
class ParamBinder {
public:
    ParamBinder(ag::Graph& g, const ParamStore& store, bool with_grad)
        : g_(&g), store_(&store), with_grad_(with_grad),
          nodes_(static_cast<std::size_t>(store.count()), nullptr) {}

    ag::Var operator[](int index);
    ag::Var operator[](const std::string& name);

    const std::vector<int>& touched() const { return touched_; }
    // grads[i] += binding gradient of parameter i (skipping untouched ones).
    void export_grads(std::vector<Tensor>& grads) const;

private:
    ag::Graph* g_;
    const ParamStore* store_;
    bool with_grad_;
    std::vector<ag::Node*> nodes_;
    std::vector<int> touched_;
};

// Checkpoint container: magic, format version, the flat key=value config text
// the model was built from, then named float64 little-endian tensors.
void save_checkpoint(const std::string& path, const std::string& config_text,
                     const ParamStore& store);
struct LoadedCheckpoint {
    std::string config_text;
    std::vector<std::pair<std::string, Tensor>> tensors;
};
LoadedCheckpoint read_checkpoint(const std::string& path);
// Strict restore: the file must carry exactly the store's parameter set with
// matching shapes.
void load_checkpoint_into(const std::string& path, ParamStore& store, std::string* config_text);

}  // namespace nltrack
