#include "nestopt/transforms.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "nestopt/errors.hpp"
#include "step_json.hpp"

using json = nlohmann::ordered_json;

namespace nestopt {

const char *kind_name(Kind k) {
    switch (k) {
    case Kind::interchange: return "interchange";
    case Kind::reversal: return "reversal";
    case Kind::skewing: return "skewing";
    case Kind::tiling: return "tiling";
    case Kind::unrolling: return "unrolling";
    case Kind::parallelization: return "parallelization";
    }
    return "?";
}

Kind kind_from_name(const std::string &name) {
    for (int i = 0; i < kNumKinds; i++)
        if (name == kind_name(static_cast<Kind>(i))) return static_cast<Kind>(i);
    throw ConfigError("unknown transformation kind: " + name);
}

ScheduleState identity_state(const Program &p) {
    ScheduleState s;
    for (const LoopNest &n : p.nests) {
        NestSchedule ns;
        ns.U = IntMatrix::identity(n.depth);
        ns.loop_extents = n.extents;
        s.nests.push_back(std::move(ns));
    }
    return s;
}

std::vector<DependenceSet> program_dependences(const Program &p) {
    std::vector<DependenceSet> deps;
    deps.reserve(p.nests.size());
    for (const LoopNest &n : p.nests) deps.push_back(compute_dependences(n));
    return deps;
}

std::vector<TiledLoop> tiled_structure(const NestSchedule &ns) {
    int depth = static_cast<int>(ns.loop_extents.size());
    std::vector<TiledLoop> out;
    if (!ns.tiling) {
        for (int k = 0; k < depth; k++) out.push_back({TiledLoop::plain, k});
        return out;
    }
    int lo = ns.tiling->band_lo, hi = ns.tiling->band_hi;
    for (int k = 0; k < lo; k++) out.push_back({TiledLoop::plain, k});
    for (int k = lo; k <= hi; k++) out.push_back({TiledLoop::counter, k});
    for (int k = lo; k <= hi; k++) out.push_back({TiledLoop::point, k});
    for (int k = hi + 1; k < depth; k++) out.push_back({TiledLoop::plain, k});
    return out;
}

namespace {

int64_t tile_size_for(const NestSchedule &ns, int level) {
    return ns.tiling->sizes[level - ns.tiling->band_lo];
}

}  // namespace

bool distance_ordered(const DistVec &transformed, const NestSchedule &ns) {
    // Walk the post-tiling loop order. Tile counters compare floor(y/s): a
    // component >= s always advances the counter (the dependence is carried
    // there no matter what follows); |component| < s leaves room for equal
    // counters, so the scan continues into the point loops.
    for (const TiledLoop &tl : tiled_structure(ns)) {
        int64_t v = transformed[tl.level];
        if (tl.role == TiledLoop::counter) {
            if (v >= tile_size_for(ns, tl.level)) return true;
            if (v < 0) return false;
        } else {
            if (v > 0) return true;
            if (v < 0) return false;
        }
    }
    return false;  // zero vector: never stored in a DependenceSet
}

bool carried_at(const DistVec &transformed, const NestSchedule &ns, int level) {
    std::vector<TiledLoop> loops = tiled_structure(ns);
    if (level < 0 || level >= static_cast<int>(loops.size()))
        throw std::out_of_range("loop level out of range");
    for (int i = 0; i < level; i++) {
        const TiledLoop &tl = loops[i];
        int64_t v = transformed[tl.level];
        if (tl.role == TiledLoop::counter) {
            // Counters can only agree when the component stays inside one
            // tile stretch.
            if (v >= tile_size_for(ns, tl.level) || -v >= tile_size_for(ns, tl.level))
                return false;
        } else {
            if (v != 0) return false;
        }
    }
    return transformed[loops[level].level] != 0;
}

bool state_legal(const ScheduleState &s, const std::vector<DependenceSet> &deps) {
    if (s.nests.size() != deps.size())
        throw std::invalid_argument("dependence sets do not match state nests");
    for (size_t i = 0; i < s.nests.size(); i++) {
        const NestSchedule &ns = s.nests[i];
        std::vector<DistVec> dv = transform_distances(deps[i], ns.U);
        for (const DistVec &d : dv)
            if (!distance_ordered(d, ns)) return false;
        if (ns.parallel) {
            for (const DistVec &d : dv)
                if (carried_at(d, ns, *ns.parallel)) return false;
        }
    }
    return true;
}

namespace {

void check_nest_index(const ScheduleState &s, int nest) {
    if (nest < 0 || nest >= static_cast<int>(s.nests.size()))
        throw ConfigError("nest index out of range: " + std::to_string(nest));
}

// Structural validity of a step against the current state; legality is a
// separate question.
void check_well_formed(const ScheduleState &s, const Transformation &t) {
    check_nest_index(s, t.nest);
    const NestSchedule &ns = s.nests[t.nest];
    int depth = static_cast<int>(ns.loop_extents.size());
    auto in_range = [&](int p) { return p >= 0 && p < depth; };
    bool unimodular = t.kind == Kind::interchange || t.kind == Kind::reversal ||
                      t.kind == Kind::skewing;
    if (unimodular && (ns.tiling || ns.parallel))
        throw ConfigError("loop-order transformations must precede tiling and parallelization");

    switch (t.kind) {
    case Kind::interchange: {
        const auto &prm = std::get<InterchangeParams>(t.params);
        if (!in_range(prm.p) || !in_range(prm.q) || prm.p >= prm.q)
            throw ConfigError("interchange requires loop positions p < q within the nest");
        break;
    }
    case Kind::reversal: {
        const auto &prm = std::get<ReversalParams>(t.params);
        if (!in_range(prm.p)) throw ConfigError("reversal loop out of range");
        break;
    }
    case Kind::skewing: {
        const auto &prm = std::get<SkewingParams>(t.params);
        if (!in_range(prm.p) || !in_range(prm.q) || prm.p >= prm.q)
            throw ConfigError("skewing requires loop positions p < q within the nest");
        if (prm.factor < 1) throw ConfigError("skew factor must be >= 1");
        break;
    }
    case Kind::tiling: {
        const auto &prm = std::get<TilingParams>(t.params);
        if (ns.tiling) throw ConfigError("nest already tiled");
        int width = prm.band_hi - prm.band_lo + 1;
        if (!in_range(prm.band_lo) || !in_range(prm.band_hi) || width < 2 || width > 3)
            throw ConfigError("tiling band must cover 2..3 contiguous loops");
        if (static_cast<int>(prm.sizes.size()) != width)
            throw ConfigError("tile size count must match band width");
        for (int64_t sz : prm.sizes)
            if (sz < 2) throw ConfigError("tile sizes must be >= 2");
        break;
    }
    case Kind::unrolling: {
        const auto &prm = std::get<UnrollingParams>(t.params);
        if (ns.unroll) throw ConfigError("nest already unrolled");
        if (prm.loop != ns.tiled_depth() - 1)
            throw ConfigError("unrolling targets the innermost loop only");
        if (prm.factor < 2) throw ConfigError("unroll factor must be >= 2");
        break;
    }
    case Kind::parallelization: {
        const auto &prm = std::get<ParallelizationParams>(t.params);
        if (ns.parallel) throw ConfigError("nest already parallelized");
        if (prm.loop < 0 || prm.loop >= ns.tiled_depth())
            throw ConfigError("parallel loop out of range");
        break;
    }
    }
}

NestSchedule apply_to_nest(const NestSchedule &in, const Transformation &t) {
    NestSchedule ns = in;
    switch (t.kind) {
    case Kind::interchange: {
        const auto &prm = std::get<InterchangeParams>(t.params);
        for (int c = 0; c < ns.U.n; c++)
            std::swap(ns.U.at(prm.p, c), ns.U.at(prm.q, c));
        std::swap(ns.loop_extents[prm.p], ns.loop_extents[prm.q]);
        break;
    }
    case Kind::reversal: {
        const auto &prm = std::get<ReversalParams>(t.params);
        for (int c = 0; c < ns.U.n; c++) ns.U.at(prm.p, c) = -ns.U.at(prm.p, c);
        break;
    }
    case Kind::skewing: {
        const auto &prm = std::get<SkewingParams>(t.params);
        for (int c = 0; c < ns.U.n; c++)
            ns.U.at(prm.p, c) += prm.factor * ns.U.at(prm.q, c);
        break;
    }
    case Kind::tiling: {
        const auto &prm = std::get<TilingParams>(t.params);
        ns.tiling = TilingAnnotation{prm.band_lo, prm.band_hi, prm.sizes};
        break;
    }
    case Kind::unrolling: {
        const auto &prm = std::get<UnrollingParams>(t.params);
        ns.unroll = UnrollAnnotation{prm.loop, prm.factor};
        break;
    }
    case Kind::parallelization: {
        const auto &prm = std::get<ParallelizationParams>(t.params);
        ns.parallel = prm.loop;
        break;
    }
    }
    return ns;
}

}  // namespace

bool is_legal(const ScheduleState &s, const Transformation &t,
              const std::vector<DependenceSet> &deps) {
    check_well_formed(s, t);
    const NestSchedule &ns = s.nests[t.nest];
    const DependenceSet &d = deps[t.nest];

    switch (t.kind) {
    case Kind::interchange:
    case Kind::reversal:
    case Kind::skewing: {
        NestSchedule next = apply_to_nest(ns, t);
        for (const DistVec &v : transform_distances(d, next.U))
            if (!is_lex_positive(v)) return false;
        return true;
    }
    case Kind::tiling: {
        const auto &prm = std::get<TilingParams>(t.params);
        return band_permutable(transform_distances(d, ns.U), prm.band_lo, prm.band_hi);
    }
    case Kind::unrolling:
        return true;
    case Kind::parallelization: {
        const auto &prm = std::get<ParallelizationParams>(t.params);
        for (const DistVec &v : transform_distances(d, ns.U))
            if (carried_at(v, ns, prm.loop)) return false;
        return true;
    }
    }
    return false;
}

ScheduleState apply(const ScheduleState &s, const Transformation &t,
                    const std::vector<DependenceSet> &deps) {
    if (!is_legal(s, t, deps)) {
        std::ostringstream msg;
        msg << "illegal " << kind_name(t.kind) << " on nest " << t.nest;
        throw LegalityError(msg.str());
    }
    return apply_unchecked(s, t);
}

ScheduleState apply_unchecked(const ScheduleState &s, const Transformation &t) {
    check_well_formed(s, t);
    ScheduleState out = s;
    out.nests[t.nest] = apply_to_nest(s.nests[t.nest], t);
    out.steps.push_back(t);
    return out;
}

std::optional<int64_t> solve_skew_parallel(const DependenceSet &deps, int p, int q,
                                           int64_t max_factor) {
    if (deps.empty()) return std::nullopt;
    for (int64_t f = 1; f <= max_factor; f++) {
        bool ok = true;
        for (const DistVec &v : deps.distances) {
            bool carried_before = false;
            for (int k = 0; k < p; k++)
                if (v[k] != 0) {
                    carried_before = true;
                    break;
                }
            if (carried_before) continue;
            if (v[p] + f * v[q] <= 0) {
                ok = false;
                break;
            }
        }
        if (ok) return f;
    }
    return std::nullopt;
}

int64_t solve_skew_locality(const DependenceSet &deps, int p, int q, int64_t max_factor) {
    int64_t best_f = 0;
    int64_t best_norm = 0;
    for (const DistVec &v : deps.distances) best_norm += std::abs(v[p]);
    for (int64_t f = 1; f <= max_factor; f++) {
        int64_t norm = 0;
        for (const DistVec &v : deps.distances) norm += std::abs(v[p] + f * v[q]);
        if (norm < best_norm) {
            best_norm = norm;
            best_f = f;
        }
    }
    return best_f;
}

std::vector<Transformation> enumerate_candidates(const Program &p, const ScheduleState &s,
                                                 int nest, Kind kind,
                                                 const TransformSpaceConfig &cfg,
                                                 const std::vector<DependenceSet> &deps) {
    check_nest_index(s, nest);
    const NestSchedule &ns = s.nests[nest];
    int depth = p.nests[nest].depth;
    std::vector<Transformation> out;
    auto emit = [&](Transformation t) {
        if (is_legal(s, t, deps)) out.push_back(std::move(t));
    };

    // A parallelized nest is final; loop-order changes additionally require
    // the nest to be untiled.
    if (ns.parallel) return out;
    bool unimodular_ok = !ns.tiling;

    switch (kind) {
    case Kind::interchange:
        if (!unimodular_ok) break;
        for (int a = 0; a < depth; a++)
            for (int b = a + 1; b < depth; b++)
                emit({Kind::interchange, nest, InterchangeParams{a, b}});
        break;
    case Kind::reversal:
        if (!unimodular_ok) break;
        for (int a = 0; a < depth; a++)
            emit({Kind::reversal, nest, ReversalParams{a}});
        break;
    case Kind::skewing: {
        if (!unimodular_ok) break;
        DependenceSet current;
        current.distances = transform_distances(deps[nest], ns.U);
        std::sort(current.distances.begin(), current.distances.end());
        if (current.empty()) break;
        for (int a = 0; a + 1 < depth; a++) {
            std::vector<int64_t> factors;
            if (auto f = solve_skew_parallel(current, a, a + 1, cfg.max_skew_factor))
                factors.push_back(*f);
            int64_t fl = solve_skew_locality(current, a, a + 1, cfg.max_skew_factor);
            if (fl >= 1 && (factors.empty() || factors[0] != fl)) factors.push_back(fl);
            std::sort(factors.begin(), factors.end());
            for (int64_t f : factors)
                emit({Kind::skewing, nest, SkewingParams{a, a + 1, f}});
        }
        break;
    }
    case Kind::tiling: {
        if (ns.tiling) break;
        for (int lo = 0; lo < depth; lo++) {
            for (int width = 2; width <= 3; width++) {
                int hi = lo + width - 1;
                if (hi >= depth) continue;
                // Each band loop independently picks a size, but only sizes
                // strictly inside the loop's extent are meaningful.
                std::vector<std::vector<int64_t>> per_loop(width);
                bool feasible = true;
                for (int k = 0; k < width; k++) {
                    for (int64_t sz : cfg.tile_choices)
                        if (sz < ns.loop_extents[lo + k]) per_loop[k].push_back(sz);
                    if (per_loop[k].empty()) feasible = false;
                }
                if (!feasible) continue;
                std::vector<int64_t> sizes(width);
                std::vector<size_t> idx(width, 0);
                while (true) {
                    for (int k = 0; k < width; k++) sizes[k] = per_loop[k][idx[k]];
                    emit({Kind::tiling, nest, TilingParams{lo, hi, sizes}});
                    int k = width - 1;
                    while (k >= 0 && ++idx[k] == per_loop[k].size()) idx[k--] = 0;
                    if (k < 0) break;
                }
            }
        }
        break;
    }
    case Kind::unrolling: {
        if (ns.unroll) break;
        int inner = ns.tiled_depth() - 1;
        for (int64_t u : cfg.unroll_choices)
            emit({Kind::unrolling, nest, UnrollingParams{inner, u}});
        break;
    }
    case Kind::parallelization: {
        int total = ns.tiled_depth();
        for (int lv = 0; lv < total; lv++)
            emit({Kind::parallelization, nest, ParallelizationParams{lv, total}});
        break;
    }
    }
    return out;
}

std::string signature(const ScheduleState &s) {
    std::ostringstream sig;
    for (size_t i = 0; i < s.nests.size(); i++) {
        const NestSchedule &ns = s.nests[i];
        if (i) sig << '|';
        sig << 'U';
        for (int64_t v : ns.U.a) sig << ',' << v;
        sig << ";T";
        if (ns.tiling) {
            sig << ns.tiling->band_lo << '-' << ns.tiling->band_hi;
            for (int64_t sz : ns.tiling->sizes) sig << 'x' << sz;
        }
        sig << ";R";
        if (ns.unroll) sig << ns.unroll->loop << 'x' << ns.unroll->factor;
        sig << ";P";
        if (ns.parallel) sig << *ns.parallel;
    }
    return sig.str();
}

namespace detail {

json step_to_json_obj(const Transformation &t) {
    json j;
    j["kind"] = kind_name(t.kind);
    j["nest"] = t.nest;
    json prm;
    switch (t.kind) {
    case Kind::interchange: {
        const auto &x = std::get<InterchangeParams>(t.params);
        prm["p"] = x.p;
        prm["q"] = x.q;
        break;
    }
    case Kind::reversal: {
        const auto &x = std::get<ReversalParams>(t.params);
        prm["p"] = x.p;
        break;
    }
    case Kind::skewing: {
        const auto &x = std::get<SkewingParams>(t.params);
        prm["p"] = x.p;
        prm["q"] = x.q;
        prm["factor"] = x.factor;
        break;
    }
    case Kind::tiling: {
        const auto &x = std::get<TilingParams>(t.params);
        prm["band"] = json::array({x.band_lo, x.band_hi});
        prm["sizes"] = x.sizes;
        break;
    }
    case Kind::unrolling: {
        const auto &x = std::get<UnrollingParams>(t.params);
        prm["loop"] = x.loop;
        prm["factor"] = x.factor;
        break;
    }
    case Kind::parallelization: {
        const auto &x = std::get<ParallelizationParams>(t.params);
        prm["loop"] = x.loop;
        break;
    }
    }
    j["params"] = std::move(prm);
    if (t.kind == Kind::parallelization) {
        // The analyses need the loop structure's total depth once the
        // program is no longer at hand; record it with the step.
        j["depth"] = std::get<ParallelizationParams>(t.params).depth;
    }
    return j;
}

Transformation step_from_json_obj(const json &j) {
    Transformation t;
    t.kind = kind_from_name(j.at("kind").get<std::string>());
    t.nest = j.at("nest").get<int>();
    const json &prm = j.at("params");
    switch (t.kind) {
    case Kind::interchange:
        t.params = InterchangeParams{prm.at("p").get<int>(), prm.at("q").get<int>()};
        break;
    case Kind::reversal:
        t.params = ReversalParams{prm.at("p").get<int>()};
        break;
    case Kind::skewing:
        t.params = SkewingParams{prm.at("p").get<int>(), prm.at("q").get<int>(),
                                 prm.at("factor").get<int64_t>()};
        break;
    case Kind::tiling: {
        const json &band = prm.at("band");
        t.params = TilingParams{band.at(0).get<int>(), band.at(1).get<int>(),
                                prm.at("sizes").get<std::vector<int64_t>>()};
        break;
    }
    case Kind::unrolling:
        t.params = UnrollingParams{prm.at("loop").get<int>(), prm.at("factor").get<int64_t>()};
        break;
    case Kind::parallelization: {
        ParallelizationParams x;
        x.loop = prm.at("loop").get<int>();
        x.depth = j.contains("depth") ? j.at("depth").get<int>() : 0;
        t.params = x;
        break;
    }
    }
    return t;
}

}  // namespace detail

std::string step_to_json(const Transformation &t) {
    return detail::step_to_json_obj(t).dump();
}

Transformation step_from_json_text(const std::string &text) {
    return detail::step_from_json_obj(json::parse(text));
}

std::string schedule_to_json_array(const std::vector<Transformation> &steps) {
    json arr = json::array();
    for (const Transformation &t : steps) arr.push_back(detail::step_to_json_obj(t));
    return arr.dump();
}

}  // namespace nestopt
