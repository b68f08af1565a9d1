#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nltrack/common.hpp"
#include "nltrack/synth/dataset.hpp"

using namespace nltrack;
using namespace nltrack::synth;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("nltrack_ds_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::vector<SequenceSample> small_corpus() {
    WorldConfig cfg;
    cfg.num_frames = 4;
    std::vector<SequenceSample> out;
    for (std::uint64_t seed = 0; seed < 10; ++seed) out.push_back(generate_sequence(cfg, seed));
    return out;
}

}  // namespace

TEST_CASE("datasets round-trip element-wise bit-exactly") {
    TempDir tmp;
    const std::vector<SequenceSample> wrote = small_corpus();
    write_dataset(wrote, tmp.path.string());
    const std::vector<SequenceSample> got = read_dataset(tmp.path.string());
    REQUIRE(got.size() == wrote.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].seed == wrote[i].seed);
        CHECK(got[i].config_hash == wrote[i].config_hash);
        CHECK(got[i].target_id == wrote[i].target_id);
        CHECK(got[i].description == wrote[i].description);
        CHECK(got[i].tokens.ids == wrote[i].tokens.ids);
        CHECK(got[i].tokens.mask == wrote[i].tokens.mask);
        REQUIRE(got[i].frames.size() == wrote[i].frames.size());
        for (std::size_t t = 0; t < got[i].frames.size(); ++t)
            CHECK(bit_equal(got[i].frames[t], wrote[i].frames[t]));
        REQUIRE(got[i].gt.size() == wrote[i].gt.size());
        for (std::size_t t = 0; t < got[i].gt.size(); ++t) {
            CHECK(got[i].gt[t].box == wrote[i].gt[t].box);  // exact double equality
            CHECK(got[i].gt[t].out_of_view == wrote[i].gt[t].out_of_view);
        }
    }
}

TEST_CASE("a truncated frame blob is reported as a parse error") {
    TempDir tmp;
    write_dataset(small_corpus(), tmp.path.string());
    const fs::path blob = tmp.path / "frames_000003.bin";
    fs::resize_file(blob, fs::file_size(blob) - 100);
    try {
        read_dataset(tmp.path.string());
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::parse_error);
        CHECK(std::string(e.what()).find("frames_000003.bin") != std::string::npos);
    }
}

TEST_CASE("a corrupt index line is reported with its record number") {
    TempDir tmp;
    write_dataset(small_corpus(), tmp.path.string());
    // Damage record 2 in place.
    std::vector<std::string> lines;
    {
        std::ifstream in(tmp.path / "index.jsonl");
        std::string l;
        while (std::getline(in, l)) lines.push_back(l);
    }
    lines[2] = "{not json";
    {
        std::ofstream out(tmp.path / "index.jsonl", std::ios::trunc);
        for (const std::string& l : lines) out << l << '\n';
    }
    try {
        read_dataset(tmp.path.string());
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::parse_error);
        CHECK(std::string(e.what()).find("record 2") != std::string::npos);
    }
}

TEST_CASE("an index version bump is reported as a version mismatch") {
    TempDir tmp;
    write_dataset(small_corpus(), tmp.path.string());
    std::vector<std::string> lines;
    {
        std::ifstream in(tmp.path / "index.jsonl");
        std::string l;
        while (std::getline(in, l)) lines.push_back(l);
    }
    std::string& l0 = lines[0];
    const auto at = l0.find("\"version\":1");
    REQUIRE(at != std::string::npos);
    l0.replace(at, 11, "\"version\":9");
    {
        std::ofstream out(tmp.path / "index.jsonl", std::ios::trunc);
        for (const std::string& l : lines) out << l << '\n';
    }
    try {
        read_dataset(tmp.path.string());
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::version_mismatch);
    }
}

TEST_CASE("a frame blob with a foreign magic is rejected") {
    TempDir tmp;
    write_dataset(small_corpus(), tmp.path.string());
    {
        std::ofstream out(tmp.path / "frames_000000.bin", std::ios::binary | std::ios::trunc);
        out << "GARBAGEGARBAGEGARBAGE";
    }
    try {
        read_dataset(tmp.path.string());
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::parse_error);
    }
}
