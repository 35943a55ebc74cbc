#include "nestopt/cost.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "nestopt/errors.hpp"

using json = nlohmann::ordered_json;

namespace nestopt {

namespace {

int64_t ceildiv(int64_t a, int64_t b) { return (a + b - 1) / b; }

// log2 of an unroll factor. Exact for powers of two so the common factors
// never pick up libm rounding.
double log2_of(int64_t u) {
    if (u > 0 && (u & (u - 1)) == 0) {
        int lg = 0;
        while ((int64_t{1} << lg) < u) lg++;
        return static_cast<double>(lg);
    }
    return std::log2(static_cast<double>(u));
}

struct NestCost {
    CostBreakdown b;
};

CostBreakdown nest_cost(const LoopNest &nest, const NestSchedule &ns, const MachineConfig &mc) {
    CostBreakdown out;
    int depth = nest.depth;

    // Post-tiling loop structure with per-level trip counts. Tile counters
    // run ceil(e/s) times, point loops s times; the remainder shows up as
    // modeled overhead rather than a special case.
    std::vector<TiledLoop> loops = tiled_structure(ns);
    std::vector<int64_t> trips(loops.size());
    for (size_t j = 0; j < loops.size(); j++) {
        const TiledLoop &tl = loops[j];
        int64_t e = ns.loop_extents[tl.level];
        if (tl.role == TiledLoop::counter)
            trips[j] = ceildiv(e, ns.tiling->sizes[tl.level - ns.tiling->band_lo]);
        else if (tl.role == TiledLoop::point)
            trips[j] = ns.tiling->sizes[tl.level - ns.tiling->band_lo];
        else
            trips[j] = e;
    }

    // Effective trip counts: the parallel level's chunk count replaces its
    // extent.
    std::vector<int64_t> eff = trips;
    if (ns.parallel) {
        int64_t e = trips[*ns.parallel];
        eff[*ns.parallel] = ceildiv(e, std::min(mc.cores, e));
    }

    // Memory references. The stride of every access against the innermost
    // transformed loop comes from the layout weights dotted with the column
    // of U^-1 that the innermost loop advances along.
    std::vector<int64_t> layout(depth);
    int64_t w = 1;
    for (int k = depth - 1; k >= 0; k--) {
        layout[k] = w;
        w *= nest.extents[k];
    }
    IntMatrix inv = ns.U.inverse_unimodular();
    int64_t stride_dot = 0;
    for (int k = 0; k < depth; k++) stride_dot += layout[k] * inv.at(k, depth - 1);
    int64_t stride = std::abs(stride_dot);

    // Tile footprint: elements touched by one tile, full extents on loops
    // inside the band's body, one distinct array at a time.
    bool tile_fits = false;
    if (ns.tiling) {
        std::set<std::string> arrays;
        for (const AccessPattern &a : nest.accesses) arrays.insert(a.array);
        int64_t per_array = mc.elem_bytes;
        for (size_t j = 0; j < loops.size(); j++)
            if (loops[j].role == TiledLoop::point ||
                (loops[j].role == TiledLoop::plain && loops[j].level > ns.tiling->band_hi))
                per_array *= trips[j];
        int64_t footprint = per_array * static_cast<int64_t>(arrays.size());
        tile_fits = footprint <= mc.cache_bytes;
    }

    double miss = 0.0;
    if (stride != 0)
        miss = std::min(1.0, static_cast<double>(stride) / static_cast<double>(mc.line_elems));
    if (tile_fits) miss *= mc.tile_discount;

    size_t ref_count = 0;
    std::set<std::pair<std::string, std::vector<int>>> distinct;
    for (const AccessPattern &a : nest.accesses)
        for (const auto &o : a.offsets) {
            ref_count++;
            distinct.insert({a.array, o});
        }
    double mem_leaf = static_cast<double>(ref_count) * miss * mc.miss_penalty;

    double ilp = 1.0;
    double spill_mult = 1.0;
    if (ns.unroll) {
        int64_t u = ns.unroll->factor;
        ilp = 1.0 - std::min(mc.ilp_gain_cap, mc.ilp_slope * log2_of(u));
        int64_t live = static_cast<int64_t>(distinct.size()) + 1;
        double pressure = static_cast<double>(std::max<int64_t>(0, u * live - mc.registers));
        spill_mult = 1.0 + mc.spill_slope * pressure / static_cast<double>(mc.registers);
    }

    int64_t body_iters = 1;
    for (int64_t e : eff) body_iters *= e;
    double body = static_cast<double>(body_iters);

    out.work = body * static_cast<double>(nest.statement_cost) * ilp;
    out.memory = body * mem_leaf * ilp;
    out.spill = body * (static_cast<double>(nest.statement_cost) + mem_leaf) * ilp *
                (spill_mult - 1.0);

    // Loop overhead: one charge per iteration at every level; the innermost
    // charge shrinks by the unroll factor.
    double loop_term = 0.0;
    int64_t prefix = 1;
    for (size_t j = 0; j < loops.size(); j++) {
        prefix *= eff[j];
        double cl = mc.loop_overhead;
        if (ns.unroll && j + 1 == loops.size()) cl /= static_cast<double>(ns.unroll->factor);
        loop_term += static_cast<double>(prefix) * cl;
    }
    out.loop = loop_term;

    if (ns.parallel) {
        int64_t entries = 1;
        for (int j = 0; j < *ns.parallel; j++) entries *= trips[j];
        out.spawn = static_cast<double>(entries) * mc.spawn_cost;
    }

    if (!ns.U.is_signed_permutation()) {
        int64_t total_iters = 1;
        for (int64_t e : nest.extents) total_iters *= e;
        out.skew = mc.skew_overhead * static_cast<double>(total_iters);
    }

    return out;
}

}  // namespace

CostBreakdown evaluate_breakdown(const Program &p, const ScheduleState &s,
                                 const MachineConfig &mc) {
    std::vector<DependenceSet> deps = program_dependences(p);
    if (!state_legal(s, deps)) throw LegalityError("cost model given an illegal schedule");
    CostBreakdown total;
    for (size_t i = 0; i < p.nests.size(); i++) {
        CostBreakdown nb = nest_cost(p.nests[i], s.nests[i], mc);
        total.work += nb.work;
        total.memory += nb.memory;
        total.loop += nb.loop;
        total.spawn += nb.spawn;
        total.skew += nb.skew;
        total.spill += nb.spill;
    }
    return total;
}

double evaluate_time(const Program &p, const ScheduleState &s, const MachineConfig &mc) {
    return evaluate_breakdown(p, s, mc).total();
}

double speedup(const Program &p, const ScheduleState &s, const MachineConfig &mc) {
    return evaluate_time(p, identity_state(p), mc) / evaluate_time(p, s, mc);
}

namespace {

template <typename T>
void read_field(const json &j, const char *name, T &dst, bool &found) {
    if (j.contains(name)) {
        dst = j.at(name).get<T>();
        found = true;
    }
}

}  // namespace

MachineConfig load_machine_config(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bad machine config: ") + e.what());
    }
    MachineConfig mc;
    try {
        for (const auto &item : j.items()) {
            const std::string &k = item.key();
            const json &v = item.value();
            if (k == "cores") mc.cores = v.get<int64_t>();
            else if (k == "cache_bytes") mc.cache_bytes = v.get<int64_t>();
            else if (k == "line_elems") mc.line_elems = v.get<int64_t>();
            else if (k == "elem_bytes") mc.elem_bytes = v.get<int64_t>();
            else if (k == "miss_penalty") mc.miss_penalty = v.get<double>();
            else if (k == "loop_overhead") mc.loop_overhead = v.get<double>();
            else if (k == "spawn_cost") mc.spawn_cost = v.get<double>();
            else if (k == "skew_overhead") mc.skew_overhead = v.get<double>();
            else if (k == "registers") mc.registers = v.get<int64_t>();
            else if (k == "ilp_gain_cap") mc.ilp_gain_cap = v.get<double>();
            else if (k == "ilp_slope") mc.ilp_slope = v.get<double>();
            else if (k == "spill_slope") mc.spill_slope = v.get<double>();
            else if (k == "tile_discount") mc.tile_discount = v.get<double>();
            else throw ConfigError("unknown machine config key: " + k);
        }
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bad machine config: ") + e.what());
    }
    if (mc.cores < 1 || mc.line_elems < 1 || mc.elem_bytes < 1 || mc.registers < 1 ||
        mc.cache_bytes < 1)
        throw ConfigError("machine config integer fields must be positive");
    return mc;
}

std::string machine_config_to_json(const MachineConfig &mc) {
    json j;
    j["cores"] = mc.cores;
    j["cache_bytes"] = mc.cache_bytes;
    j["line_elems"] = mc.line_elems;
    j["elem_bytes"] = mc.elem_bytes;
    j["miss_penalty"] = mc.miss_penalty;
    j["loop_overhead"] = mc.loop_overhead;
    j["spawn_cost"] = mc.spawn_cost;
    j["skew_overhead"] = mc.skew_overhead;
    j["registers"] = mc.registers;
    j["ilp_gain_cap"] = mc.ilp_gain_cap;
    j["ilp_slope"] = mc.ilp_slope;
    j["spill_slope"] = mc.spill_slope;
    j["tile_discount"] = mc.tile_discount;
    return j.dump();
}

}  // namespace nestopt
