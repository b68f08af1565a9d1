#include "nltrack/synth/dataset.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "nltrack/common.hpp"

namespace nltrack::synth {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kFrameMagic[8] = {'N', 'L', 'T', 'F', 'R', 'A', 'M', 'E'};
constexpr std::uint32_t kIndexVersion = 1;
constexpr std::uint32_t kFrameVersion = 1;

template <typename T>
void put(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is, const std::string& path) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) fail(ErrorCode::parse_error, "frame blob truncated: " + path);
    return v;
}

std::string blob_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frames_%06zu.bin", i);
    return buf;
}

}  // namespace

void write_frames_blob(const std::vector<Image>& frames, const std::string& path) {
    if (frames.empty()) fail(ErrorCode::shape_error, "refusing to write an empty frame blob");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorCode::io_error, "cannot open for writing: " + path);
    os.write(kFrameMagic, sizeof(kFrameMagic));
    put(os, kFrameVersion);
    put(os, static_cast<std::uint32_t>(frames.size()));
    put(os, static_cast<std::uint32_t>(frames[0].c));
    put(os, static_cast<std::uint32_t>(frames[0].h));
    put(os, static_cast<std::uint32_t>(frames[0].w));
    for (const Image& f : frames) {
        if (f.c != frames[0].c || f.h != frames[0].h || f.w != frames[0].w)
            fail(ErrorCode::shape_error, "frames in one blob must share a shape");
        os.write(reinterpret_cast<const char*>(f.px.data()),
                 static_cast<std::streamsize>(f.px.size() * sizeof(float)));
    }
    if (!os) fail(ErrorCode::io_error, "frame blob write failed: " + path);
}

std::vector<Image> read_frames_blob(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(ErrorCode::io_error, "cannot open frame blob: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kFrameMagic, sizeof(kFrameMagic)) != 0)
        fail(ErrorCode::parse_error, "not a frame blob: " + path);
    const auto version = get<std::uint32_t>(is, path);
    if (version != kFrameVersion)
        fail(ErrorCode::version_mismatch, "frame blob version " + std::to_string(version) +
                                              ", expected " + std::to_string(kFrameVersion));
    const auto t = get<std::uint32_t>(is, path);
    const auto c = get<std::uint32_t>(is, path);
    const auto h = get<std::uint32_t>(is, path);
    const auto w = get<std::uint32_t>(is, path);
    if (t == 0 || c == 0 || h == 0 || w == 0 ||
        static_cast<std::uint64_t>(t) * c * h * w > (1ull << 30))
        fail(ErrorCode::parse_error, "frame blob header implausible: " + path);
    std::vector<Image> frames;
    frames.reserve(t);
    for (std::uint32_t i = 0; i < t; ++i) {
        Image img(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w));
        is.read(reinterpret_cast<char*>(img.px.data()),
                static_cast<std::streamsize>(img.px.size() * sizeof(float)));
        if (!is) fail(ErrorCode::parse_error, "frame blob truncated: " + path);
        frames.push_back(std::move(img));
    }
    return frames;
}

void write_dataset(const std::vector<SequenceSample>& samples, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream idx(fs::path(dir) / "index.jsonl", std::ios::trunc);
    if (!idx) fail(ErrorCode::io_error, "cannot open index for writing in " + dir);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const SequenceSample& s = samples[i];
        json rec;
        rec["version"] = kIndexVersion;
        rec["seed"] = std::to_string(s.seed);              // decimal string keeps all 64 bits
        rec["config_hash"] = std::to_string(s.config_hash);
        rec["target_id"] = s.target_id;
        rec["description"] = s.description;
        rec["tokens"] = s.tokens.ids;
        json boxes = json::array(), oov = json::array();
        for (const GtBox& g : s.gt) {
            boxes.push_back({g.box[0], g.box[1], g.box[2], g.box[3]});
            oov.push_back(g.out_of_view ? 1 : 0);
        }
        rec["boxes"] = std::move(boxes);
        rec["oov"] = std::move(oov);
        rec["frames"] = blob_name(i);
        idx << rec.dump() << '\n';
        write_frames_blob(s.frames, (fs::path(dir) / blob_name(i)).string());
    }
    if (!idx) fail(ErrorCode::io_error, "index write failed in " + dir);
}

std::vector<SequenceSample> read_dataset(const std::string& dir) {
    std::ifstream idx(fs::path(dir) / "index.jsonl");
    if (!idx) fail(ErrorCode::io_error, "cannot open index in " + dir);
    std::vector<SequenceSample> out;
    std::string line;
    std::size_t rec_no = 0;
    while (std::getline(idx, line)) {
        if (line.empty()) continue;
        const std::string where = "record " + std::to_string(rec_no);
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded())
            fail(ErrorCode::parse_error, where + ": malformed index line in " + dir);
        try {
            const auto version = rec.at("version").get<std::uint32_t>();
            if (version != kIndexVersion)
                fail(ErrorCode::version_mismatch,
                     where + ": index version " + std::to_string(version) + ", expected " +
                         std::to_string(kIndexVersion));
            SequenceSample s;
            s.seed = std::stoull(rec.at("seed").get<std::string>());
            s.config_hash = std::stoull(rec.at("config_hash").get<std::string>());
            s.target_id = rec.at("target_id").get<int>();
            s.description = rec.at("description").get<std::string>();
            s.tokens.ids = rec.at("tokens").get<std::vector<int>>();
            if (static_cast<int>(s.tokens.ids.size()) != kMaxTokens)
                fail(ErrorCode::parse_error, where + ": token vector length is not " +
                                                 std::to_string(kMaxTokens));
            s.tokens.vocab_size = vocab_size();
            // Validity is implied by the ids: everything up to and including SEP.
            s.tokens.mask.assign(s.tokens.ids.size(), 0);
            for (std::size_t k = 0; k < s.tokens.ids.size(); ++k) {
                s.tokens.mask[k] = 1;
                if (s.tokens.ids[k] == kSepId) break;
            }
            const auto& boxes = rec.at("boxes");
            const auto& oov = rec.at("oov");
            if (boxes.size() != oov.size())
                fail(ErrorCode::parse_error, where + ": boxes and oov lengths disagree");
            for (std::size_t k = 0; k < boxes.size(); ++k) {
                GtBox g;
                const auto& b = boxes[k];
                if (!b.is_array() || b.size() != 4)
                    fail(ErrorCode::parse_error, where + ": box is not 4 numbers");
                for (int j = 0; j < 4; ++j)
                    g.box[static_cast<std::size_t>(j)] = b[static_cast<std::size_t>(j)].get<double>();
                g.out_of_view = oov[k].get<int>() != 0;
                s.gt.push_back(g);
            }
            s.frames = read_frames_blob((fs::path(dir) / rec.at("frames").get<std::string>()).string());
            if (s.frames.size() != s.gt.size())
                fail(ErrorCode::parse_error, where + ": frame count disagrees with box count");
            out.push_back(std::move(s));
        } catch (const json::exception& e) {
            fail(ErrorCode::parse_error, where + ": " + e.what());
        } catch (const std::invalid_argument&) {
            fail(ErrorCode::parse_error, where + ": bad integer field");
        }
        ++rec_no;
    }
    return out;
}

}  // namespace nltrack::synth
