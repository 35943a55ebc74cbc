#ifndef NESTOPT_SEARCH_HPP
#define NESTOPT_SEARCH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nestopt/cost.hpp"
#include "nestopt/datapoint.hpp"
#include "nestopt/transforms.hpp"

namespace nestopt {

enum class SearchMode { fixed_order_beam, arbitrary_order_beam, exhaustive, random_walk };

const char *search_mode_name(SearchMode m);
SearchMode search_mode_from_name(const std::string &name);

struct SearchConfig {
    SearchMode mode = SearchMode::fixed_order_beam;
    int beam_k = 4;
    // One kind per beam level. Parallelization, when present, must be last;
    // the default is the order the transition analysis recommends.
    std::vector<Kind> fixed_order = {Kind::skewing, Kind::interchange, Kind::reversal,
                                     Kind::unrolling, Kind::tiling, Kind::parallelization};
    int max_len = 6;
    int walks_per_program = 4;
    uint64_t walk_seed = 0;
    TransformSpaceConfig space;  // not part of the JSON form; defaults apply
};

SearchConfig load_search_config(const std::string &path);

// Statistical pruning rules. Disabled fields leave the candidate stream
// untouched, so an empty RuleSet is a strict no-op.
struct RuleSet {
    std::optional<double> parallel_depth_cutoff;       // keep rel. level <= cutoff
    bool skew_gate = false;                            // skew only when no loop can go parallel
    std::optional<std::vector<int64_t>> fixed_unroll;  // allowed unroll factors
    std::optional<int> max_schedule_len;

    bool empty() const {
        return !parallel_depth_cutoff && !skew_gate && !fixed_unroll && !max_schedule_len;
    }
};

RuleSet load_rule_set(const std::string &path);

// level / (depth - 1): 0 = outermost, 1 = innermost. Depth-1 nests map to 0.
double relative_level(int level, int depth);

struct ScoredState {
    ScheduleState state;
    double speedup = 1.0;
};

struct SearchResult {
    std::vector<ScoredState> best;      // global top-k, descending speedup
    std::vector<ScoredState> visited;   // every evaluated state, in evaluation order
    int64_t evaluations = 0;            // cost model calls
    int64_t explored_signatures = 0;
    std::vector<std::string> trace;     // one line per beam level
};

// Drops candidates the rule set forbids; order is preserved.
std::vector<Transformation> filter_candidates(const std::vector<Transformation> &cands,
                                              const ScheduleState &s, const RuleSet &rules,
                                              const std::vector<DependenceSet> &deps);

SearchResult beam_search(const Program &p, const SearchConfig &sc, const RuleSet &rules,
                         const MachineConfig &mc);

// Complete enumeration of the arbitrary-order space up to max_len. Refuses
// (GuardError) beyond `guard` distinct states.
SearchResult exhaustive_search(const Program &p, const SearchConfig &sc,
                               const MachineConfig &mc, const RuleSet &rules = {},
                               size_t guard = 100000);

struct WalkResult {
    std::vector<ScoredState> visited;
    int64_t evaluations = 0;
};

// Seeded uniform random walks over the filtered legal candidate stream. Each
// walk stops at parallelization or max_len; every visited state is reported.
WalkResult random_walks(const Program &p, const SearchConfig &sc, const RuleSet &rules,
                        const MachineConfig &mc);

}  // namespace nestopt

#endif
