#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "nltrack/common.hpp"
#include "nltrack/core/autograd.hpp"
#include "nltrack/core/params.hpp"

using namespace nltrack;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("nltrack_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const char* name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

}  // namespace

TEST_CASE("parameter initialization depends on name and seed, not order") {
    ParamStore a;
    a.add("alpha", 3, 4, Init::gaussian());
    a.add("beta", 2, 2, Init::gaussian());
    a.initialize(42);

    ParamStore b;
    b.add("beta", 2, 2, Init::gaussian());
    b.add("gamma", 5, 1, Init::gaussian());
    b.add("alpha", 3, 4, Init::gaussian());
    b.initialize(42);

    CHECK(bit_equal(a.entry(a.index_of("alpha")).value, b.entry(b.index_of("alpha")).value));
    CHECK(bit_equal(a.entry(a.index_of("beta")).value, b.entry(b.index_of("beta")).value));

    ParamStore c;
    c.add("alpha", 3, 4, Init::gaussian());
    c.initialize(43);
    CHECK_FALSE(bit_equal(a.entry(0).value, c.entry(0).value));
}

TEST_CASE("zero and one initializers fill exactly") {
    ParamStore s;
    s.add("z", 2, 3, Init::zero());
    s.add("o", 2, 3, Init::one());
    s.initialize(7);
    for (double v : s.entry(0).value.d) CHECK(v == 0.0);
    for (double v : s.entry(1).value.d) CHECK(v == 1.0);
}

TEST_CASE("duplicate parameter names are rejected") {
    ParamStore s;
    s.add("w", 1, 1, Init::zero());
    CHECK_THROWS_AS(s.add("w", 2, 2, Init::zero()), nltrack::Error);
}

TEST_CASE("binder hands out one leaf per parameter and tracks touches") {
    ParamStore s;
    s.add("w", 2, 2, Init::gaussian());
    s.add("unused", 2, 2, Init::gaussian());
    s.initialize(1);

    ag::Graph g;
    ParamBinder bind(g, s, true);
    ag::Var w1 = bind["w"];
    ag::Var w2 = bind["w"];
    CHECK(w1.node() == w2.node());
    CHECK(bind.touched().size() == 1);
    CHECK(bind.touched()[0] == s.index_of("w"));

    // Two uses of the same binding accumulate into one gradient.
    ag::Var loss = ag::sum_all(ag::mul(w1, w2));
    g.backward(loss);
    for (std::size_t i = 0; i < w1.val().d.size(); ++i)
        CHECK(w1.grad().d[i] == doctest::Approx(2.0 * s.entry(0).value.d[i]).epsilon(1e-12));

    std::vector<Tensor> grads(static_cast<std::size_t>(s.count()));
    bind.export_grads(grads);
    CHECK(grads[0].rows == 2);
    CHECK(grads[1].d.empty());  // untouched parameter exports nothing
}

TEST_CASE("checkpoint save and load round-trip bit-exactly") {
    TempDir tmp;
    ParamStore s;
    s.add("enc.w", 4, 5, Init::gaussian(), ParamGroup::encoder);
    s.add("head.b", 1, 3, Init::gaussian());
    s.initialize(99);
    const std::string cfg = "model.dim=64\nseed=99\n";
    save_checkpoint(tmp.file("m.ckpt"), cfg, s);

    ParamStore t;
    t.add("enc.w", 4, 5, Init::zero(), ParamGroup::encoder);
    t.add("head.b", 1, 3, Init::zero());
    std::string cfg_out;
    load_checkpoint_into(tmp.file("m.ckpt"), t, &cfg_out);
    CHECK(cfg_out == cfg);
    CHECK(bit_equal(s.entry(0).value, t.entry(0).value));
    CHECK(bit_equal(s.entry(1).value, t.entry(1).value));
}

TEST_CASE("checkpoint loading rejects wrong files with typed errors") {
    TempDir tmp;
    ParamStore s;
    s.add("w", 2, 2, Init::gaussian());
    s.initialize(5);
    save_checkpoint(tmp.file("good.ckpt"), "k=v\n", s);

    SUBCASE("missing file") {
        try {
            read_checkpoint(tmp.file("absent.ckpt"));
            FAIL("expected a throw");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::io_error);
        }
    }
    SUBCASE("wrong magic") {
        const std::string p = tmp.file("junk.ckpt");
        FILE* f = std::fopen(p.c_str(), "wb");
        std::fputs("definitely not a checkpoint", f);
        std::fclose(f);
        try {
            read_checkpoint(p);
            FAIL("expected a throw");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::parse_error);
        }
    }
    SUBCASE("parameter set mismatch") {
        ParamStore t;
        t.add("w", 2, 2, Init::zero());
        t.add("extra", 1, 1, Init::zero());
        try {
            load_checkpoint_into(tmp.file("good.ckpt"), t, nullptr);
            FAIL("expected a throw");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::incompatible_checkpoint);
        }
    }
    SUBCASE("shape mismatch") {
        ParamStore t;
        t.add("w", 2, 3, Init::zero());
        try {
            load_checkpoint_into(tmp.file("good.ckpt"), t, nullptr);
            FAIL("expected a throw");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::incompatible_checkpoint);
        }
    }
    SUBCASE("truncated file") {
        const std::string p = tmp.file("cut.ckpt");
        std::error_code ec;
        std::filesystem::copy_file(tmp.file("good.ckpt"), p,
                                   std::filesystem::copy_options::overwrite_existing, ec);
        std::filesystem::resize_file(p, std::filesystem::file_size(p) - 9);
        try {
            read_checkpoint(p);
            FAIL("expected a throw");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::parse_error);
        }
    }
}
