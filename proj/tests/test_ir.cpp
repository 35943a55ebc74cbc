#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "nestopt/dependence.hpp"
#include "nestopt/ir.hpp"

using namespace nestopt;

namespace {

std::string temp_path(const char *name) {
    return std::string("test_ir_") + name + ".tmp.jsonl";
}

}  // namespace

TEST_CASE("generation is deterministic and seed-sensitive") {
    GeneratorConfig cfg;
    Program a = generate_program(17, cfg);
    Program b = generate_program(17, cfg);
    Program c = generate_program(18, cfg);
    CHECK(program_to_json_line(a) == program_to_json_line(b));
    CHECK(a.id != c.id);
}

TEST_CASE("corpus programs carry distinct ids and validate cleanly") {
    GeneratorConfig cfg;
    std::vector<Program> corpus = generate_corpus(5, 200, cfg);
    REQUIRE(corpus.size() == 200);
    std::set<std::string> ids;
    for (const Program &p : corpus) {
        ids.insert(p.id);
        std::vector<Violation> v = validate_program(p);
        for (const Violation &viol : v) INFO(viol.field << ": " << viol.message);
        CHECK(v.empty());
    }
    CHECK(ids.size() == corpus.size());
}

TEST_CASE("generated nests respect structural bounds") {
    GeneratorConfig cfg;
    cfg.max_nests = 3;
    cfg.max_depth = 4;
    for (uint64_t seed = 0; seed < 100; seed++) {
        Program p = generate_program(seed, cfg);
        CHECK(!p.nests.empty());
        CHECK(p.nests.size() <= 3);
        for (const LoopNest &n : p.nests) {
            CHECK(n.depth >= 1);
            CHECK(n.depth <= 4);
            CHECK(n.extents.size() == static_cast<size_t>(n.depth));
            for (int64_t e : n.extents) {
                bool known = false;
                for (int64_t c : cfg.extent_choices) known |= (e == c);
                CHECK(known);
            }
            int writes = 0;
            for (const AccessPattern &a : n.accesses) {
                if (a.is_write) writes++;
                for (const auto &off : a.offsets)
                    CHECK(off.size() == static_cast<size_t>(n.depth));
            }
            CHECK(writes == 1);
        }
    }
}

TEST_CASE("elementwise nests have no dependences, reductions always do") {
    GeneratorConfig cfg;
    int elementwise_seen = 0, reductions_seen = 0;
    for (uint64_t seed = 0; seed < 300; seed++) {
        Program p = generate_program(seed, cfg);
        for (const LoopNest &n : p.nests) {
            if (n.pattern == Pattern::elementwise) {
                elementwise_seen++;
                CHECK(compute_dependences(n).empty());
            } else if (n.pattern == Pattern::reduction) {
                reductions_seen++;
                CHECK(!compute_dependences(n).empty());
            }
        }
    }
    CHECK(elementwise_seen > 0);
    CHECK(reductions_seen > 0);
}

TEST_CASE("stencil self-reads point lexicographically backwards") {
    GeneratorConfig cfg;
    int stencils_seen = 0;
    for (uint64_t seed = 0; seed < 300; seed++) {
        Program p = generate_program(seed, cfg);
        for (const LoopNest &n : p.nests) {
            if (n.pattern != Pattern::stencil) continue;
            stencils_seen++;
            std::string written;
            for (const AccessPattern &a : n.accesses)
                if (a.is_write) written = a.array;
            for (const AccessPattern &a : n.accesses) {
                if (a.is_write || a.array != written) continue;
                for (const auto &off : a.offsets) {
                    // first nonzero component must be negative
                    bool ok = false;
                    for (int v : off) {
                        if (v < 0) { ok = true; break; }
                        if (v > 0) break;
                    }
                    CHECK(ok);
                }
            }
        }
    }
    CHECK(stencils_seen > 0);
}

TEST_CASE("program JSON round-trips exactly") {
    GeneratorConfig cfg;
    for (uint64_t seed = 40; seed < 60; seed++) {
        Program p = generate_program(seed, cfg);
        std::string line = program_to_json_line(p);
        Program q = program_from_json_line(line, 1);
        CHECK(program_to_json_line(q) == line);
        CHECK(q.id == p.id);
        CHECK(q.seed == p.seed);
        REQUIRE(q.nests.size() == p.nests.size());
        for (size_t i = 0; i < p.nests.size(); i++) {
            CHECK(q.nests[i].extents == p.nests[i].extents);
            CHECK(q.nests[i].pattern == p.nests[i].pattern);
            CHECK(q.nests[i].statement_cost == p.nests[i].statement_cost);
        }
    }
}

TEST_CASE("corpus files round-trip and bad lines report their number") {
    GeneratorConfig cfg;
    std::vector<Program> corpus = generate_corpus(9, 8, cfg);
    std::string path = temp_path("roundtrip");
    write_corpus(corpus, path);
    std::vector<Program> back = read_corpus(path);
    REQUIRE(back.size() == corpus.size());
    for (size_t i = 0; i < corpus.size(); i++)
        CHECK(program_to_json_line(back[i]) == program_to_json_line(corpus[i]));

    // Corrupt the middle line and expect the error to name it.
    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f << program_to_json_line(corpus[0]) << "\n";
        f << "{\"id\":\"x\",\"seed\":0,\"nests\":[{\"depth\":1,\"extents\":[4],"
             "\"pattern\":\"fusion\",\"statement_cost\":1,\"accesses\":[]}]}\n";
        f << program_to_json_line(corpus[2]) << "\n";
    }
    try {
        read_corpus(path);
        FAIL("expected SchemaError");
    } catch (const SchemaError &e) {
        CHECK(e.line == 2);
    }
    std::remove(path.c_str());
}

TEST_CASE("empty corpus request is a config error") {
    GeneratorConfig cfg;
    CHECK_THROWS_AS(generate_corpus(1, 0, cfg), ConfigError);
}

TEST_CASE("generator config validation") {
    GeneratorConfig cfg;
    cfg.max_depth = 7;
    CHECK_THROWS_AS(generate_program(1, cfg), ConfigError);
    cfg = GeneratorConfig{};
    cfg.extent_choices = {1};
    CHECK_THROWS_AS(generate_program(1, cfg), ConfigError);
    cfg = GeneratorConfig{};
    cfg.pattern_weights = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(generate_program(1, cfg), ConfigError);
}

TEST_CASE("generator config file loading") {
    std::string path = temp_path("config");
    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f << "{\"max_nests\":1,\"max_depth\":2,\"extent_choices\":[4,5],"
             "\"pattern_weights\":{\"elementwise\":1,\"stencil\":2,\"reduction\":0}}";
    }
    GeneratorConfig cfg = load_generator_config(path);
    CHECK(cfg.max_nests == 1);
    CHECK(cfg.max_depth == 2);
    CHECK(cfg.extent_choices == std::vector<int64_t>{4, 5});
    CHECK(cfg.pattern_weights == std::vector<double>{1.0, 2.0, 0.0});

    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f << "{\"max_nests\":1,\"surprise\":3}";
    }
    CHECK_THROWS_AS(load_generator_config(path), ConfigError);
    std::remove(path.c_str());
}

TEST_CASE("validate_program flags broken programs") {
    GeneratorConfig cfg;
    Program p = generate_program(2, cfg);
    p.nests[0].extents[0] = 1;  // extent below the minimum
    CHECK(!validate_program(p).empty());

    Program q = generate_program(3, cfg);
    for (AccessPattern &a : q.nests[0].accesses) a.is_write = false;
    CHECK(!validate_program(q).empty());

    Program r = generate_program(4, cfg);
    r.id.clear();
    CHECK(!validate_program(r).empty());
}
