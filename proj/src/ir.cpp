#include "nestopt/ir.hpp"

#include <algorithm>
#include <fstream>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "nestopt/dependence.hpp"
#include "nestopt/rng.hpp"

using json = nlohmann::ordered_json;

namespace nestopt {

const char *pattern_name(Pattern p) {
    switch (p) {
    case Pattern::elementwise: return "elementwise";
    case Pattern::stencil: return "stencil";
    case Pattern::reduction: return "reduction";
    }
    return "?";
}

Pattern pattern_from_name(const std::string &name) {
    if (name == "elementwise") return Pattern::elementwise;
    if (name == "stencil") return Pattern::stencil;
    if (name == "reduction") return Pattern::reduction;
    throw ConfigError("unknown pattern: " + name);
}

namespace {

// Stencils read elements written by earlier iterations, so every offset set
// is lexicographically non-positive. Grouped sets rather than single offsets:
// a nest picks one whole set.
std::vector<std::vector<std::vector<int>>> default_catalog() {
    return {
        // depth 1
        {{-1}},
        // depth 2
        {{-1, 0}},
        {{0, -1}},
        {{-1, -1}},
        {{-1, 0}, {0, -1}},
        {{-1, 0}, {0, -1}, {-1, -1}},
        // depth 3
        {{-1, 0, 0}},
        {{0, -1, 0}},
        {{0, 0, -1}},
        {{0, -1, 0}, {0, 0, -1}},
        {{-1, 0, 0}, {0, -1, 0}, {0, 0, -1}},
        // depth 4
        {{-1, 0, 0, 0}},
        {{0, 0, 0, -1}},
        {{-1, 0, 0, 0}, {0, -1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}},
    };
}

bool lex_non_positive(const std::vector<int> &v) {
    for (int x : v) {
        if (x < 0) return true;
        if (x > 0) return false;
    }
    return true;  // all zero
}

std::vector<int> zero_offset(int depth) { return std::vector<int>(depth, 0); }

void check_config(const GeneratorConfig &cfg) {
    if (cfg.max_nests < 1 || cfg.max_nests > 4)
        throw ConfigError("max_nests must be in [1, 4]");
    if (cfg.max_depth < 1 || cfg.max_depth > 4)
        throw ConfigError("max_depth must be in [1, 4]");
    if (cfg.extent_choices.empty())
        throw ConfigError("extent_choices must be non-empty");
    for (int64_t e : cfg.extent_choices)
        if (e < 2) throw ConfigError("extent_choices entries must be >= 2");
    if (cfg.pattern_weights.size() != 3)
        throw ConfigError("pattern_weights must hold 3 entries");
    double total = 0.0;
    for (double w : cfg.pattern_weights) {
        if (w < 0.0) throw ConfigError("pattern_weights must be non-negative");
        total += w;
    }
    if (total <= 0.0) throw ConfigError("pattern_weights must not all be zero");
    for (const auto &set : cfg.stencil_offset_catalog) {
        if (set.empty()) throw ConfigError("stencil_offset_catalog entries must be non-empty");
        for (const auto &off : set) {
            if (off.empty() || !lex_non_positive(off))
                throw ConfigError("stencil offsets must be lexicographically non-positive");
        }
    }
}

std::string hex16(uint64_t v) {
    static const char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; i--) {
        s[i] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

}  // namespace

GeneratorConfig::GeneratorConfig() : stencil_offset_catalog(default_catalog()) {}

Program generate_program(uint64_t seed, const GeneratorConfig &cfg) {
    check_config(cfg);
    Rng rng(seed);
    Program p;
    p.seed = seed;
    p.id = "p" + hex16(seed);

    int n_nests = 1 + static_cast<int>(rng.bounded(cfg.max_nests));
    for (int i = 0; i < n_nests; i++) {
        LoopNest nest;
        nest.depth = 1 + static_cast<int>(rng.bounded(cfg.max_depth));
        for (int d = 0; d < nest.depth; d++)
            nest.extents.push_back(cfg.extent_choices[rng.bounded(cfg.extent_choices.size())]);

        Pattern pat = static_cast<Pattern>(rng.weighted(cfg.pattern_weights));
        std::vector<const std::vector<std::vector<int>> *> sets;
        if (pat == Pattern::stencil) {
            for (const auto &set : cfg.stencil_offset_catalog)
                if (static_cast<int>(set[0].size()) == nest.depth) sets.push_back(&set);
            // No catalog entry for this depth: degrade to elementwise rather
            // than fail the whole draw.
            if (sets.empty()) pat = Pattern::elementwise;
        }
        nest.pattern = pat;

        static const int64_t cost_choices[] = {1, 2, 4};
        nest.statement_cost = cost_choices[rng.bounded(3)];

        std::string self = "A" + std::to_string(i);
        auto external = [&](int k) { return "B" + std::to_string(i) + "_" + std::to_string(k); };

        switch (pat) {
        case Pattern::elementwise: {
            nest.accesses.push_back({self, {zero_offset(nest.depth)}, true});
            int n_reads = static_cast<int>(rng.bounded(3));  // 0..2
            for (int k = 0; k < n_reads; k++)
                nest.accesses.push_back({external(k), {zero_offset(nest.depth)}, false});
            break;
        }
        case Pattern::stencil: {
            nest.accesses.push_back({self, {zero_offset(nest.depth)}, true});
            const auto &chosen = *sets[rng.bounded(sets.size())];
            nest.accesses.push_back({self, chosen, false});
            if (rng.bounded(2) == 1)
                nest.accesses.push_back({external(0), {zero_offset(nest.depth)}, false});
            break;
        }
        case Pattern::reduction: {
            int r = static_cast<int>(rng.bounded(nest.depth));
            nest.accesses.push_back({self, {zero_offset(nest.depth)}, true});
            std::vector<int> off = zero_offset(nest.depth);
            off[r] = -1;  // accumulate along loop r
            nest.accesses.push_back({self, {off}, false});
            nest.accesses.push_back({external(0), {zero_offset(nest.depth)}, false});
            break;
        }
        }
        p.nests.push_back(std::move(nest));
    }
    return p;
}

std::vector<Program> generate_corpus(uint64_t seed, size_t n, const GeneratorConfig &cfg) {
    if (n == 0) throw ConfigError("corpus size must be positive");
    std::vector<Program> out;
    out.reserve(n);
    for (size_t i = 0; i < n; i++)
        out.push_back(generate_program(derive_seed(seed, i), cfg));
    return out;
}

std::vector<Violation> validate_program(const Program &p) {
    std::vector<Violation> v;
    auto add = [&](int nest, const std::string &field, const std::string &msg) {
        v.push_back({nest, field, msg});
    };
    if (p.id.empty()) add(-1, "id", "empty id");
    if (p.nests.empty() || p.nests.size() > 4)
        add(-1, "nests", "nest count must be in [1, 4]");

    for (size_t i = 0; i < p.nests.size(); i++) {
        const LoopNest &n = p.nests[i];
        std::string base = "nests[" + std::to_string(i) + "]";
        int ni = static_cast<int>(i);
        if (n.depth < 1 || n.depth > 4) add(ni, base + ".depth", "depth must be in [1, 4]");
        if (static_cast<int>(n.extents.size()) != n.depth)
            add(ni, base + ".extents", "extent count must equal depth");
        for (size_t d = 0; d < n.extents.size(); d++)
            if (n.extents[d] < 2)
                add(ni, base + ".extents[" + std::to_string(d) + "]", "extent must be >= 2");
        if (n.statement_cost < 1)
            add(ni, base + ".statement_cost", "statement cost must be >= 1");

        int writes = 0;
        std::string self;
        for (size_t a = 0; a < n.accesses.size(); a++) {
            const AccessPattern &ap = n.accesses[a];
            std::string abase = base + ".accesses[" + std::to_string(a) + "]";
            if (ap.array.empty()) add(ni, abase + ".array", "empty array name");
            if (ap.offsets.empty()) add(ni, abase + ".offsets", "no offset vectors");
            for (size_t o = 0; o < ap.offsets.size(); o++)
                if (static_cast<int>(ap.offsets[o].size()) != n.depth)
                    add(ni, abase + ".offsets[" + std::to_string(o) + "]",
                        "offset length must equal depth");
            if (ap.is_write) {
                writes++;
                self = ap.array;
            }
        }
        if (writes != 1) add(ni, base + ".accesses", "exactly one write access required");

        if (n.pattern == Pattern::stencil && writes == 1) {
            for (size_t a = 0; a < n.accesses.size(); a++) {
                const AccessPattern &ap = n.accesses[a];
                if (ap.is_write || ap.array != self) continue;
                for (size_t o = 0; o < ap.offsets.size(); o++)
                    if (static_cast<int>(ap.offsets[o].size()) == n.depth &&
                        !lex_non_positive(ap.offsets[o]))
                        add(ni,
                            base + ".accesses[" + std::to_string(a) + "].offsets[" +
                                std::to_string(o) + "]",
                            "stencil self-reads must be lexicographically non-positive");
            }
        }
        if (n.pattern == Pattern::elementwise &&
            static_cast<int>(n.extents.size()) == n.depth && writes == 1) {
            if (!compute_dependences(n).empty())
                add(ni, base + ".accesses", "elementwise nest must carry no dependences");
        }
    }
    return v;
}

namespace {

json nest_to_json(const LoopNest &n) {
    json jn;
    jn["depth"] = n.depth;
    jn["extents"] = n.extents;
    jn["pattern"] = pattern_name(n.pattern);
    jn["statement_cost"] = n.statement_cost;
    json accs = json::array();
    for (const AccessPattern &a : n.accesses) {
        json ja;
        ja["array"] = a.array;
        ja["offsets"] = a.offsets;
        ja["is_write"] = a.is_write;
        accs.push_back(std::move(ja));
    }
    jn["accesses"] = std::move(accs);
    return jn;
}

LoopNest nest_from_json(const json &jn) {
    LoopNest n;
    n.depth = jn.at("depth").get<int>();
    n.extents = jn.at("extents").get<std::vector<int64_t>>();
    n.pattern = pattern_from_name(jn.at("pattern").get<std::string>());
    n.statement_cost = jn.at("statement_cost").get<int64_t>();
    for (const json &ja : jn.at("accesses")) {
        AccessPattern a;
        a.array = ja.at("array").get<std::string>();
        a.offsets = ja.at("offsets").get<std::vector<std::vector<int>>>();
        a.is_write = ja.at("is_write").get<bool>();
        n.accesses.push_back(std::move(a));
    }
    return n;
}

}  // namespace

std::string program_to_json_line(const Program &p) {
    json j;
    j["id"] = p.id;
    j["seed"] = p.seed;
    json nests = json::array();
    for (const LoopNest &n : p.nests) nests.push_back(nest_to_json(n));
    j["nests"] = std::move(nests);
    return j.dump();
}

Program program_from_json_line(const std::string &line, size_t line_no) {
    json j;
    try {
        j = json::parse(line);
        Program p;
        p.id = j.at("id").get<std::string>();
        p.seed = j.at("seed").get<uint64_t>();
        for (const json &jn : j.at("nests")) p.nests.push_back(nest_from_json(jn));
        return p;
    } catch (const json::exception &e) {
        throw SchemaError(line_no, std::string("bad program record: ") + e.what());
    } catch (const ConfigError &e) {
        throw SchemaError(line_no, std::string("bad program record: ") + e.what());
    }
}

void write_corpus(const std::vector<Program> &corpus, const std::string &path) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open for writing: " + tmp);
        for (const Program &p : corpus) f << program_to_json_line(p) << '\n';
        f.flush();
        if (!f) {
            std::remove(tmp.c_str());
            throw IoError("write failed: " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw IoError("cannot rename into place: " + path);
    }
}

std::vector<Program> read_corpus(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    std::vector<Program> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(f, line)) {
        line_no++;
        if (line.empty()) continue;
        out.push_back(program_from_json_line(line, line_no));
    }
    return out;
}

GeneratorConfig load_generator_config(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bad generator config: ") + e.what());
    }
    GeneratorConfig cfg;
    try {
        for (const auto &item : j.items()) {
            const std::string &k = item.key();
            if (k == "max_nests") cfg.max_nests = item.value().get<int>();
            else if (k == "max_depth") cfg.max_depth = item.value().get<int>();
            else if (k == "extent_choices")
                cfg.extent_choices = item.value().get<std::vector<int64_t>>();
            else if (k == "pattern_weights") {
                const json &w = item.value();
                cfg.pattern_weights = {w.at("elementwise").get<double>(),
                                       w.at("stencil").get<double>(),
                                       w.at("reduction").get<double>()};
            } else if (k == "stencil_offset_catalog")
                cfg.stencil_offset_catalog =
                    item.value().get<std::vector<std::vector<std::vector<int>>>>();
            else
                throw ConfigError("unknown generator config key: " + k);
        }
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bad generator config: ") + e.what());
    }
    check_config(cfg);
    return cfg;
}

}  // namespace nestopt
