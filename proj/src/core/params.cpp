#include "nltrack/core/params.hpp"

#include <cstring>
#include <fstream>

#include "nltrack/common.hpp"
#include "nltrack/core/rng.hpp"

namespace nltrack {

int ParamStore::add(const std::string& name, int rows, int cols, Init init, ParamGroup group) {
    if (by_name_.count(name)) fail(ErrorCode::init_failed, "duplicate parameter name: " + name);
    if (rows <= 0 || cols <= 0) fail(ErrorCode::shape_error, "parameter shape must be positive");
    const int idx = count();
    entries_.push_back({name, Tensor::zeros(rows, cols), init, group});
    by_name_.emplace(name, idx);
    return idx;
}

int ParamStore::index_of(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? -1 : it->second;
}

std::uint64_t ParamStore::scalar_count() const {
    std::uint64_t n = 0;
    for (const Entry& e : entries_) n += e.value.d.size();
    return n;
}

void ParamStore::initialize(std::uint64_t seed) {
    for (Entry& e : entries_) {
        switch (e.init.kind) {
            case Init::zeros:
                e.value.fill(0.0);
                break;
            case Init::ones:
                e.value.fill(1.0);
                break;
            case Init::normal: {
                Rng rng(splitmix64(seed ^ fnv1a64(e.name)));
                for (double& x : e.value.d) x = rng.normal(0.0, e.init.stddev);
                break;
            }
        }
    }
}

ag::Var ParamBinder::operator[](int index) {
    if (index < 0 || index >= store_->count())
        fail(ErrorCode::init_failed, "parameter index out of range");
    ag::Node*& slot = nodes_[static_cast<std::size_t>(index)];
    if (!slot) {
        ag::Var v = with_grad_ ? g_->leaf_param(store_->entry(index).value, index)
                               : g_->leaf(store_->entry(index).value, false);
        slot = v.node();
        touched_.push_back(index);
    }
    return ag::Var(g_, slot);
}

ag::Var ParamBinder::operator[](const std::string& name) {
    const int idx = store_->index_of(name);
    if (idx < 0) fail(ErrorCode::init_failed, "unknown parameter name: " + name);
    return (*this)[idx];
}

void ParamBinder::export_grads(std::vector<Tensor>& grads) const {
    if (grads.size() != static_cast<std::size_t>(store_->count()))
        fail(ErrorCode::shape_error, "gradient accumulator count disagrees");
    for (int idx : touched_) {
        ag::Node* n = nodes_[static_cast<std::size_t>(idx)];
        if (!n->grad_alloc) continue;  // bound but never fed by the loss
        Tensor& dst = grads[static_cast<std::size_t>(idx)];
        if (dst.d.empty()) dst = Tensor::zeros(n->value.rows, n->value.cols);
        for (std::size_t i = 0; i < dst.d.size(); ++i) dst.d[i] += n->grad.d[i];
    }
}

// ---------------------------------------------------------------------------
// checkpoint container
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'N', 'L', 'T', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

// Fixed little-endian layout; this code targets little-endian hosts and the
// writer/reader pair below is the format's single authority.
template <typename T>
void put(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) fail(ErrorCode::parse_error, "checkpoint truncated");
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& config_text,
                     const ParamStore& store) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorCode::io_error, "cannot open checkpoint for writing: " + path);
    os.write(kMagic, sizeof(kMagic));
    put(os, kVersion);
    put(os, static_cast<std::uint64_t>(config_text.size()));
    os.write(config_text.data(), static_cast<std::streamsize>(config_text.size()));
    put(os, static_cast<std::uint64_t>(store.count()));
    for (int i = 0; i < store.count(); ++i) {
        const ParamStore::Entry& e = store.entry(i);
        put(os, static_cast<std::uint32_t>(e.name.size()));
        os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
        put(os, static_cast<std::uint32_t>(e.value.rows));
        put(os, static_cast<std::uint32_t>(e.value.cols));
        os.write(reinterpret_cast<const char*>(e.value.d.data()),
                 static_cast<std::streamsize>(e.value.d.size() * sizeof(double)));
    }
    if (!os) fail(ErrorCode::io_error, "checkpoint write failed: " + path);
}

LoadedCheckpoint read_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(ErrorCode::io_error, "cannot open checkpoint: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        fail(ErrorCode::parse_error, "not a checkpoint file: " + path);
    const auto version = get<std::uint32_t>(is);
    if (version != kVersion)
        fail(ErrorCode::version_mismatch,
             "checkpoint format version " + std::to_string(version) + ", expected " +
                 std::to_string(kVersion));

    LoadedCheckpoint out;
    const auto cfg_len = get<std::uint64_t>(is);
    out.config_text.resize(cfg_len);
    is.read(out.config_text.data(), static_cast<std::streamsize>(cfg_len));
    if (!is) fail(ErrorCode::parse_error, "checkpoint truncated");

    const auto n = get<std::uint64_t>(is);
    out.tensors.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto name_len = get<std::uint32_t>(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        if (!is) fail(ErrorCode::parse_error, "checkpoint truncated");
        const auto rows = get<std::uint32_t>(is);
        const auto cols = get<std::uint32_t>(is);
        if (rows == 0 || cols == 0 || static_cast<std::uint64_t>(rows) * cols > (1u << 28))
            fail(ErrorCode::parse_error, "checkpoint tensor shape implausible");
        Tensor t = Tensor::zeros(static_cast<int>(rows), static_cast<int>(cols));
        is.read(reinterpret_cast<char*>(t.d.data()),
                static_cast<std::streamsize>(t.d.size() * sizeof(double)));
        if (!is) fail(ErrorCode::parse_error, "checkpoint truncated");
        out.tensors.emplace_back(std::move(name), std::move(t));
    }
    return out;
}

void load_checkpoint_into(const std::string& path, ParamStore& store, std::string* config_text) {
    LoadedCheckpoint ck = read_checkpoint(path);
    if (ck.tensors.size() != static_cast<std::size_t>(store.count()))
        fail(ErrorCode::incompatible_checkpoint,
             "checkpoint holds " + std::to_string(ck.tensors.size()) + " tensors, model expects " +
                 std::to_string(store.count()));
    for (auto& [name, tensor] : ck.tensors) {
        const int idx = store.index_of(name);
        if (idx < 0)
            fail(ErrorCode::incompatible_checkpoint, "checkpoint tensor not in model: " + name);
        ParamStore::Entry& e = store.entry(idx);
        if (!same_shape(e.value, tensor))
            fail(ErrorCode::incompatible_checkpoint, "checkpoint tensor shape disagrees: " + name);
        e.value = std::move(tensor);
    }
    if (config_text) *config_text = std::move(ck.config_text);
}

}  // namespace nltrack
