#include "nestopt/search.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "nestopt/errors.hpp"
#include "nestopt/rng.hpp"

using json = nlohmann::ordered_json;

namespace nestopt {

const char *search_mode_name(SearchMode m) {
    switch (m) {
        case SearchMode::fixed_order_beam: return "beam-fixed";
        case SearchMode::arbitrary_order_beam: return "beam-arbitrary";
        case SearchMode::exhaustive: return "exhaustive";
        case SearchMode::random_walk: return "random-walk";
    }
    return "beam-fixed";
}

SearchMode search_mode_from_name(const std::string &name) {
    if (name == "beam-fixed") return SearchMode::fixed_order_beam;
    if (name == "beam-arbitrary") return SearchMode::arbitrary_order_beam;
    if (name == "exhaustive") return SearchMode::exhaustive;
    if (name == "random-walk") return SearchMode::random_walk;
    throw ConfigError("unknown search mode: " + name);
}

double relative_level(int level, int depth) {
    if (depth <= 1) return 0.0;
    return static_cast<double>(level) / static_cast<double>(depth - 1);
}

namespace {

// Deterministic preference order: higher speedup, then shorter schedules,
// then the lexicographically smaller serialized schedule. Total over states
// with distinct signatures, so sorting is reproducible across platforms.
bool better(const ScoredState &a, const ScoredState &b) {
    if (a.speedup != b.speedup) return a.speedup > b.speedup;
    if (a.state.steps.size() != b.state.steps.size())
        return a.state.steps.size() < b.state.steps.size();
    return schedule_to_json_array(a.state.steps) < schedule_to_json_array(b.state.steps);
}

std::vector<ScoredState> top_k(std::vector<ScoredState> states, size_t k) {
    std::sort(states.begin(), states.end(), better);
    if (states.size() > k) states.resize(k);
    return states;
}

const std::array<Kind, kNumKinds> kAllKinds = {Kind::interchange, Kind::reversal,
                                               Kind::skewing,     Kind::tiling,
                                               Kind::unrolling,   Kind::parallelization};

uint64_t fnv1a64(const std::string &s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Whether some post-tiling loop of nest `n` could be marked parallel right
// now. Used by the skew gate: skewing is only worth exploring when no loop
// is parallelizable as-is.
bool any_parallel_legal(const ScheduleState &s, int n, const std::vector<DependenceSet> &deps) {
    const NestSchedule &ns = s.nests[n];
    if (ns.parallel) return false;
    std::vector<DistVec> transformed = transform_distances(deps[n], ns.U);
    int td = ns.tiled_depth();
    for (int level = 0; level < td; level++) {
        bool carried = false;
        for (const DistVec &t : transformed)
            if (carried_at(t, ns, level)) {
                carried = true;
                break;
            }
        if (!carried) return true;
    }
    return false;
}

}  // namespace

std::vector<Transformation> filter_candidates(const std::vector<Transformation> &cands,
                                              const ScheduleState &s, const RuleSet &rules,
                                              const std::vector<DependenceSet> &deps) {
    if (rules.max_schedule_len &&
        s.steps.size() >= static_cast<size_t>(*rules.max_schedule_len))
        return {};
    std::vector<Transformation> out;
    out.reserve(cands.size());
    for (const Transformation &t : cands) {
        if (rules.parallel_depth_cutoff && t.kind == Kind::parallelization) {
            const auto &pp = std::get<ParallelizationParams>(t.params);
            if (relative_level(pp.loop, pp.depth) > *rules.parallel_depth_cutoff) continue;
        }
        if (rules.fixed_unroll && t.kind == Kind::unrolling) {
            const auto &up = std::get<UnrollingParams>(t.params);
            if (std::find(rules.fixed_unroll->begin(), rules.fixed_unroll->end(), up.factor) ==
                rules.fixed_unroll->end())
                continue;
        }
        if (rules.skew_gate && t.kind == Kind::skewing &&
            any_parallel_legal(s, t.nest, deps))
            continue;
        out.push_back(t);
    }
    return out;
}

namespace {

// Expands one state: every nest, every kind in `kinds`, rule-filtered. New
// signatures are evaluated and appended to both `visited` and `fresh`.
template <typename KindRange>
void expand(const Program &p, const ScoredState &st, const KindRange &kinds,
            const SearchConfig &sc, const RuleSet &rules, const MachineConfig &mc,
            const std::vector<DependenceSet> &deps, std::unordered_set<std::string> &explored,
            std::vector<ScoredState> &visited, std::vector<ScoredState> &fresh) {
    for (size_t n = 0; n < p.nests.size(); n++) {
        for (Kind kind : kinds) {
            std::vector<Transformation> cands = enumerate_candidates(
                p, st.state, static_cast<int>(n), kind, sc.space, deps);
            cands = filter_candidates(cands, st.state, rules, deps);
            for (const Transformation &t : cands) {
                ScheduleState child = apply_unchecked(st.state, t);
                if (!explored.insert(signature(child)).second) continue;
                ScoredState cs{std::move(child), 0.0};
                cs.speedup = speedup(p, cs.state, mc);
                visited.push_back(cs);
                fresh.push_back(std::move(cs));
            }
        }
    }
}

}  // namespace

SearchResult beam_search(const Program &p, const SearchConfig &sc, const RuleSet &rules,
                         const MachineConfig &mc) {
    std::vector<DependenceSet> deps = program_dependences(p);
    SearchResult res;
    std::unordered_set<std::string> explored;

    ScoredState root{identity_state(p), 1.0};
    explored.insert(signature(root.state));
    res.visited.push_back(root);

    std::vector<ScoredState> frontier = {root};
    int levels = sc.max_len;
    if (sc.mode == SearchMode::fixed_order_beam)
        levels = std::min<int>(levels, static_cast<int>(sc.fixed_order.size()));

    for (int level = 0; level < levels; level++) {
        std::vector<Kind> kinds;
        if (sc.mode == SearchMode::fixed_order_beam)
            kinds.push_back(sc.fixed_order[level]);
        else
            kinds.assign(kAllKinds.begin(), kAllKinds.end());

        std::vector<ScoredState> children;
        size_t before = explored.size();
        for (const ScoredState &st : frontier) {
            // Stopping here is always allowed: the parent rides along to the
            // next level unchanged, without being re-evaluated.
            children.push_back(st);
            std::vector<ScoredState> fresh;
            expand(p, st, kinds, sc, rules, mc, deps, explored, res.visited, fresh);
            for (ScoredState &cs : fresh) children.push_back(std::move(cs));
        }
        // A barren level ends an arbitrary-order search (the next level would
        // repeat the identical expansion), but merely advances a fixed-order
        // one, where later levels draw different kinds.
        if (explored.size() == before && sc.mode != SearchMode::fixed_order_beam) break;
        frontier = top_k(std::move(children), static_cast<size_t>(sc.beam_k));
        res.trace.push_back("level " + std::to_string(level + 1) + ": explored " +
                            std::to_string(explored.size()) + " states, frontier best " +
                            std::to_string(frontier.front().speedup));
    }

    res.best = top_k(res.visited, static_cast<size_t>(sc.beam_k));
    res.evaluations = static_cast<int64_t>(explored.size());
    res.explored_signatures = static_cast<int64_t>(explored.size());
    return res;
}

SearchResult exhaustive_search(const Program &p, const SearchConfig &sc,
                               const MachineConfig &mc, const RuleSet &rules, size_t guard) {
    std::vector<DependenceSet> deps = program_dependences(p);
    SearchResult res;
    std::unordered_set<std::string> explored;

    ScoredState root{identity_state(p), 1.0};
    explored.insert(signature(root.state));
    res.visited.push_back(root);

    std::deque<ScoredState> queue = {root};
    while (!queue.empty()) {
        ScoredState st = std::move(queue.front());
        queue.pop_front();
        if (st.state.steps.size() >= static_cast<size_t>(sc.max_len)) continue;
        std::vector<ScoredState> fresh;
        expand(p, st, kAllKinds, sc, rules, mc, deps, explored, res.visited, fresh);
        if (explored.size() > guard) throw GuardError(explored.size());
        for (ScoredState &cs : fresh) queue.push_back(std::move(cs));
    }

    res.best = top_k(res.visited, static_cast<size_t>(std::max(sc.beam_k, 1)));
    res.evaluations = static_cast<int64_t>(explored.size());
    res.explored_signatures = static_cast<int64_t>(explored.size());
    res.trace.push_back("exhaustive: " + std::to_string(explored.size()) + " states");
    return res;
}

WalkResult random_walks(const Program &p, const SearchConfig &sc, const RuleSet &rules,
                        const MachineConfig &mc) {
    std::vector<DependenceSet> deps = program_dependences(p);
    WalkResult out;

    // The untransformed program is a data point once per program, not once
    // per walk.
    out.visited.push_back({identity_state(p), 1.0});
    out.evaluations++;

    uint64_t program_seed = derive_seed(sc.walk_seed, fnv1a64(p.id));
    for (int w = 0; w < sc.walks_per_program; w++) {
        Rng rng(derive_seed(program_seed, static_cast<uint64_t>(w)));
        ScheduleState state = identity_state(p);
        for (int step = 0; step < sc.max_len; step++) {
            std::vector<Transformation> cands;
            for (size_t n = 0; n < p.nests.size(); n++)
                for (Kind kind : kAllKinds) {
                    std::vector<Transformation> c = enumerate_candidates(
                        p, state, static_cast<int>(n), kind, sc.space, deps);
                    for (Transformation &t : c) cands.push_back(std::move(t));
                }
            cands = filter_candidates(cands, state, rules, deps);
            if (cands.empty()) break;
            const Transformation &pick = cands[rng.bounded(cands.size())];
            state = apply_unchecked(state, pick);
            ScoredState cs{state, speedup(p, state, mc)};
            out.evaluations++;
            out.visited.push_back(std::move(cs));
        }
    }
    return out;
}

namespace {

std::vector<Kind> kinds_from_json(const json &arr) {
    std::vector<Kind> out;
    for (const auto &v : arr) out.push_back(kind_from_name(v.get<std::string>()));
    return out;
}

}  // namespace

SearchConfig load_search_config(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bad search config: ") + e.what());
    }
    SearchConfig sc;
    try {
        for (const auto &item : j.items()) {
            const std::string &k = item.key();
            const json &v = item.value();
            if (k == "mode") sc.mode = search_mode_from_name(v.get<std::string>());
            else if (k == "beam_k") sc.beam_k = v.get<int>();
            else if (k == "fixed_order") sc.fixed_order = kinds_from_json(v);
            else if (k == "max_len") sc.max_len = v.get<int>();
            else if (k == "walks_per_program") sc.walks_per_program = v.get<int>();
            else if (k == "walk_seed") sc.walk_seed = v.get<uint64_t>();
            else throw ConfigError("unknown search config key: " + k);
        }
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bad search config: ") + e.what());
    }
    if (sc.beam_k < 1) throw ConfigError("beam_k must be >= 1");
    if (sc.max_len < 0) throw ConfigError("max_len must be >= 0");
    if (sc.walks_per_program < 0) throw ConfigError("walks_per_program must be >= 0");
    return sc;
}

RuleSet load_rule_set(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bad rule set: ") + e.what());
    }
    RuleSet r;
    try {
        for (const auto &item : j.items()) {
            const std::string &k = item.key();
            const json &v = item.value();
            if (k == "parallel_depth_cutoff") r.parallel_depth_cutoff = v.get<double>();
            else if (k == "skew_gate") r.skew_gate = v.get<bool>();
            else if (k == "fixed_unroll") r.fixed_unroll = v.get<std::vector<int64_t>>();
            else if (k == "max_schedule_len") r.max_schedule_len = v.get<int>();
            else throw ConfigError("unknown rule set key: " + k);
        }
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bad rule set: ") + e.what());
    }
    if (r.parallel_depth_cutoff && (*r.parallel_depth_cutoff < 0.0 || *r.parallel_depth_cutoff > 1.0))
        throw ConfigError("parallel_depth_cutoff must lie in [0, 1]");
    if (r.max_schedule_len && *r.max_schedule_len < 0)
        throw ConfigError("max_schedule_len must be >= 0");
    return r;
}

}  // namespace nestopt
