#include "nltrack/cli/runconfig.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace nltrack::cli {

namespace {

int to_int(const std::string& key, const std::string& v) {
    int out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        fail(ErrorCode::parse_error, "'" + key + "' expects an integer, got '" + v + "'");
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        fail(ErrorCode::parse_error, "'" + key + "' expects an unsigned integer, got '" + v + "'");
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    double out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        fail(ErrorCode::parse_error, "'" + key + "' expects a number, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1") return true;
    if (v == "0") return false;
    fail(ErrorCode::parse_error, "'" + key + "' expects 0 or 1, got '" + v + "'");
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// The command-line spelling of flavors uses hyphens.
std::string flavor_text(model::Flavor f) {
    std::string s = model::flavor_name(f);
    for (char& c : s)
        if (c == '_') c = '-';
    return s;
}

model::Flavor flavor_from_text(std::string s) {
    for (char& c : s)
        if (c == '-') c = '_';
    return model::flavor_from_name(s);
}

const char* motion_text(synth::Motion m) {
    switch (m) {
        case synth::Motion::linear: return "linear";
        case synth::Motion::bounce: return "bounce";
        case synth::Motion::random_walk: return "random-walk";
    }
    fail(ErrorCode::config_invalid, "unknown motion value");
}

synth::Motion motion_from_text(const std::string& v) {
    if (v == "linear") return synth::Motion::linear;
    if (v == "bounce") return synth::Motion::bounce;
    if (v == "random-walk") return synth::Motion::random_walk;
    fail(ErrorCode::parse_error, "'world.motion' expects linear|bounce|random-walk, got '" + v + "'");
}

std::vector<std::string> split_csv(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

synth::Color color_from(const std::string& name) {
    for (int i = 0; i < synth::kColorCount; ++i)
        if (name == synth::color_name(static_cast<synth::Color>(i)))
            return static_cast<synth::Color>(i);
    fail(ErrorCode::parse_error, "'world.color_set' has unknown color '" + name + "'");
}

synth::Shape shape_from(const std::string& name) {
    for (int i = 0; i < synth::kShapeCount; ++i)
        if (name == synth::shape_name(static_cast<synth::Shape>(i)))
            return static_cast<synth::Shape>(i);
    fail(ErrorCode::parse_error, "'world.shape_set' has unknown shape '" + name + "'");
}

struct Field {
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

using IntRef = std::function<int&(RunConfig&)>;
using DoubleRef = std::function<double&(RunConfig&)>;
using U64Ref = std::function<std::uint64_t&(RunConfig&)>;
using BoolRef = std::function<bool&(RunConfig&)>;

Field fi(std::string key, IntRef ref) {
    return {key,
            [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
            [key, ref](RunConfig& c, const std::string& v) { ref(c) = to_int(key, v); }};
}

Field fd(std::string key, DoubleRef ref) {
    return {key,
            [ref](const RunConfig& c) { return fmt_double(ref(const_cast<RunConfig&>(c))); },
            [key, ref](RunConfig& c, const std::string& v) { ref(c) = to_double(key, v); }};
}

Field fu(std::string key, U64Ref ref) {
    return {key,
            [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
            [key, ref](RunConfig& c, const std::string& v) { ref(c) = to_u64(key, v); }};
}

Field fb(std::string key, BoolRef ref) {
    return {key,
            [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)) ? "1" : "0"; },
            [key, ref](RunConfig& c, const std::string& v) { ref(c) = to_bool(key, v); }};
}

// Table in canonical (sorted) key order; a test pins the ordering.
const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(fu("data.seed", [](RunConfig& c) -> std::uint64_t& { return c.data_seed; }));
        f.push_back({"eval.protocol",
                     [](const RunConfig& c) { return std::string(eval::protocol_name(c.protocol)); },
                     [](RunConfig& c, const std::string& v) { c.protocol = eval::protocol_from_name(v); }});
        f.push_back(fi("eval.sequences", [](RunConfig& c) -> int& { return c.eval_sequences; }));
        f.push_back(fd("eval.threshold_px", [](RunConfig& c) -> double& { return c.threshold_px; }));
        f.push_back(fi("model.d_lang", [](RunConfig& c) -> int& { return c.model.d_lang; }));
        f.push_back(fi("model.d_model", [](RunConfig& c) -> int& { return c.model.d_model; }));
        f.push_back(fi("model.d_vis", [](RunConfig& c) -> int& { return c.model.d_vis; }));
        f.push_back(fi("model.ffn_ratio", [](RunConfig& c) -> int& { return c.model.ffn_ratio; }));
        f.push_back({"model.flavor",
                     [](const RunConfig& c) { return flavor_text(c.model.flavor); },
                     [](RunConfig& c, const std::string& v) { c.model.flavor = flavor_from_text(v); }});
        f.push_back(fi("model.frame_size", [](RunConfig& c) -> int& { return c.model.frame_size; }));
        f.push_back(fi("model.layers_decoder", [](RunConfig& c) -> int& { return c.model.layers_decoder; }));
        f.push_back(fi("model.layers_lang", [](RunConfig& c) -> int& { return c.model.layers_lang; }));
        f.push_back(fi("model.layers_relation", [](RunConfig& c) -> int& { return c.model.layers_relation; }));
        f.push_back(fi("model.layers_temporal_dec", [](RunConfig& c) -> int& { return c.model.layers_temporal_dec; }));
        f.push_back(fi("model.layers_temporal_enc", [](RunConfig& c) -> int& { return c.model.layers_temporal_enc; }));
        f.push_back(fi("model.layers_vis", [](RunConfig& c) -> int& { return c.model.layers_vis; }));
        f.push_back(fi("model.max_tokens", [](RunConfig& c) -> int& { return c.model.max_tokens; }));
        f.push_back(fi("model.memory_capacity", [](RunConfig& c) -> int& { return c.model.memory_capacity; }));
        f.push_back(fi("model.n_heads", [](RunConfig& c) -> int& { return c.model.n_heads; }));
        f.push_back(fi("model.patch_size", [](RunConfig& c) -> int& { return c.model.patch_size; }));
        f.push_back(fi("model.roi_size", [](RunConfig& c) -> int& { return c.model.roi_size; }));
        f.push_back(fi("model.template_size", [](RunConfig& c) -> int& { return c.model.template_size; }));
        f.push_back(fi("model.vocab_size", [](RunConfig& c) -> int& { return c.model.vocab_size; }));
        f.push_back(fi("threads", [](RunConfig& c) -> int& { return c.threads; }));
        f.push_back(fi("train.batch_size", [](RunConfig& c) -> int& { return c.train.batch_size; }));
        f.push_back(fd("train.center_jitter", [](RunConfig& c) -> double& { return c.train.center_jitter; }));
        f.push_back(fd("train.clip_norm", [](RunConfig& c) -> double& { return c.train.clip_norm; }));
        f.push_back(fd("train.encoder_lr_scale", [](RunConfig& c) -> double& { return c.train.encoder_lr_scale; }));
        f.push_back(fu("train.init_seed", [](RunConfig& c) -> std::uint64_t& { return c.init_seed; }));
        f.push_back(fd("train.lambda_giou", [](RunConfig& c) -> double& { return c.train.lambda_giou; }));
        f.push_back(fd("train.lambda_l1", [](RunConfig& c) -> double& { return c.train.lambda_l1; }));
        f.push_back(fi("train.log_every", [](RunConfig& c) -> int& { return c.train.log_every; }));
        f.push_back(fd("train.lr", [](RunConfig& c) -> double& { return c.train.lr; }));
        f.push_back(fi("train.overfit_samples", [](RunConfig& c) -> int& { return c.train.overfit_samples; }));
        f.push_back(fu("train.seed", [](RunConfig& c) -> std::uint64_t& { return c.train.seed; }));
        f.push_back(fi("train.steps", [](RunConfig& c) -> int& { return c.train.steps; }));
        f.push_back(fi("train.warmup_steps", [](RunConfig& c) -> int& { return c.train.warmup_steps; }));
        f.push_back(fb("world.ambiguous_demo", [](RunConfig& c) -> bool& { return c.world.ambiguous_demo; }));
        f.push_back({"world.color_set",
                     [](const RunConfig& c) {
                         std::string out;
                         for (synth::Color col : c.world.color_set) {
                             if (!out.empty()) out += ',';
                             out += synth::color_name(col);
                         }
                         return out;
                     },
                     [](RunConfig& c, const std::string& v) {
                         c.world.color_set.clear();
                         for (const std::string& name : split_csv(v))
                             c.world.color_set.push_back(color_from(name));
                     }});
        f.push_back(fi("world.frame_size", [](RunConfig& c) -> int& { return c.world.frame_size; }));
        f.push_back(fd("world.half_max", [](RunConfig& c) -> double& { return c.world.half_max; }));
        f.push_back(fd("world.half_min", [](RunConfig& c) -> double& { return c.world.half_min; }));
        f.push_back({"world.motion",
                     [](const RunConfig& c) { return std::string(motion_text(c.world.motion)); },
                     [](RunConfig& c, const std::string& v) { c.world.motion = motion_from_text(v); }});
        f.push_back(fd("world.noise_sigma", [](RunConfig& c) -> double& { return c.world.noise_sigma; }));
        f.push_back(fi("world.num_frames", [](RunConfig& c) -> int& { return c.world.num_frames; }));
        f.push_back(fi("world.num_objects", [](RunConfig& c) -> int& { return c.world.num_objects; }));
        f.push_back(fd("world.occluder_prob", [](RunConfig& c) -> double& { return c.world.occluder_prob; }));
        f.push_back(fd("world.rotation_max_deg", [](RunConfig& c) -> double& { return c.world.rotation_max_deg; }));
        f.push_back({"world.shape_set",
                     [](const RunConfig& c) {
                         std::string out;
                         for (synth::Shape s : c.world.shape_set) {
                             if (!out.empty()) out += ',';
                             out += synth::shape_name(s);
                         }
                         return out;
                     },
                     [](RunConfig& c, const std::string& v) {
                         c.world.shape_set.clear();
                         for (const std::string& name : split_csv(v))
                             c.world.shape_set.push_back(shape_from(name));
                     }});
        f.push_back(fd("world.speed_max", [](RunConfig& c) -> double& { return c.world.speed_max; }));
        f.push_back(fd("world.speed_min", [](RunConfig& c) -> double& { return c.world.speed_min; }));
        f.push_back(fd("world.twin_prob", [](RunConfig& c) -> double& { return c.world.twin_prob; }));
        return f;
    }();
    return table;
}

const Field& find_field(const std::string& key) {
    for (const Field& f : fields())
        if (f.key == key) return f;
    fail(ErrorCode::config_invalid, "unknown config key '" + key + "'");
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void apply_line(RunConfig& c, const std::string& raw) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') return;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
        fail(ErrorCode::parse_error, "config line without '=': '" + line + "'");
    set_key(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const Field& f : fields()) k.push_back(f.key);
        return k;
    }();
    return keys;
}

void set_key(RunConfig& c, const std::string& key, const std::string& value) {
    find_field(key).set(c, value);
}

std::string get_key(const RunConfig& c, const std::string& key) {
    return find_field(key).get(c);
}

std::string to_text(const RunConfig& c) {
    std::string out;
    for (const Field& f : fields()) out += f.key + "=" + f.get(c) + "\n";
    return out;
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) apply_line(c, line);
    return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    RunConfig c;
    if (!path.empty()) {
        std::ifstream in(path, std::ios::binary);
        if (!in) fail(ErrorCode::io_error, "cannot open config '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        c = parse_config(buf.str());
    }
    for (const std::string& o : overrides) apply_line(c, o);
    return c;
}

std::uint64_t config_hash(const RunConfig& c) { return fnv1a64(to_text(c)); }

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string architecture_text(const RunConfig& c) {
    std::string out;
    for (const Field& f : fields())
        if (f.key.rfind("model.", 0) == 0) out += f.key + "=" + f.get(c) + "\n";
    return out;
}

}  // namespace nltrack::cli
