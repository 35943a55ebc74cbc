#ifndef NESTOPT_TRANSFORMS_HPP
#define NESTOPT_TRANSFORMS_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nestopt/dependence.hpp"
#include "nestopt/ir.hpp"
#include "nestopt/matrix.hpp"

namespace nestopt {

enum class Kind { interchange, reversal, skewing, tiling, unrolling, parallelization };
constexpr int kNumKinds = 6;

const char *kind_name(Kind k);
Kind kind_from_name(const std::string &name);

struct InterchangeParams { int p = 0; int q = 0; };            // p < q, loop positions
struct ReversalParams { int p = 0; };
struct SkewingParams { int p = 0; int q = 0; int64_t factor = 1; };  // row p += factor * row q
struct TilingParams {
    int band_lo = 0;
    int band_hi = 0;                 // inclusive, contiguous band of 2..3 loops
    std::vector<int64_t> sizes;      // one per band loop
};
struct UnrollingParams { int loop = 0; int64_t factor = 1; };  // innermost loop only
struct ParallelizationParams {
    int loop = 0;   // index into the post-tiling loop structure
    int depth = 0;  // total post-tiling depth when the step was formed
};

struct Transformation {
    Kind kind = Kind::interchange;
    int nest = 0;
    std::variant<InterchangeParams, ReversalParams, SkewingParams,
                 TilingParams, UnrollingParams, ParallelizationParams> params;
};

struct TilingAnnotation {
    int band_lo = 0;
    int band_hi = 0;
    std::vector<int64_t> sizes;
};

struct UnrollAnnotation {
    int loop = 0;
    int64_t factor = 1;
};

// Per-nest scheduling state: a unimodular matrix accumulating the loop-order
// part, plus at most one tiling, unroll and parallel annotation.
struct NestSchedule {
    IntMatrix U;
    std::vector<int64_t> loop_extents;  // extents in transformed loop order
    std::optional<TilingAnnotation> tiling;
    std::optional<UnrollAnnotation> unroll;
    std::optional<int> parallel;        // post-tiling loop index

    // Number of loops after tiling expands the band into counter + point
    // loops.
    int tiled_depth() const {
        int d = static_cast<int>(loop_extents.size());
        if (tiling) d += tiling->band_hi - tiling->band_lo + 1;
        return d;
    }
};

struct ScheduleState {
    std::vector<NestSchedule> nests;
    std::vector<Transformation> steps;
};

struct TransformSpaceConfig {
    std::vector<int64_t> unroll_choices = {4, 8, 16};
    std::vector<int64_t> tile_choices = {32, 64};
    int64_t max_skew_factor = 4;
};

ScheduleState identity_state(const Program &p);

std::vector<DependenceSet> program_dependences(const Program &p);

// One post-tiling loop of a nest: which original (transformed-order) level it
// reads, and whether it is a tile counter, an intra-tile point loop, or an
// untouched loop.
struct TiledLoop {
    enum Role { plain, counter, point } role = plain;
    int level = 0;  // index into the pre-tiling transformed order
};

std::vector<TiledLoop> tiled_structure(const NestSchedule &ns);

// Exact ordering check for one transformed distance against the post-tiling
// execution order. Counter loops compare floor(y/s); a component >= its tile
// size always advances the counter and therefore carries the dependence even
// if deeper components are negative.
bool distance_ordered(const DistVec &transformed, const NestSchedule &ns);

// Whether some concrete dependent pair can agree on every loop before
// `level` (post-tiling indexing) while differing at it.
bool carried_at(const DistVec &transformed, const NestSchedule &ns, int level);

// Full matrix-based legality of a composed state: every transformed distance
// ordered, and no dependence carried at the parallel loop if one is set.
bool state_legal(const ScheduleState &s, const std::vector<DependenceSet> &deps);

// Legality of applying one more step. Throws ConfigError on malformed input
// (bad indices, duplicate annotations); returns the dependence verdict.
bool is_legal(const ScheduleState &s, const Transformation &t,
              const std::vector<DependenceSet> &deps);

// Applies a legal step, returning the new state. Throws LegalityError when
// is_legal fails.
ScheduleState apply(const ScheduleState &s, const Transformation &t,
                    const std::vector<DependenceSet> &deps);

// Same, minus the legality gate. Exists so tests can build illegal states
// and compare the matrix verdict against the brute-force oracle.
ScheduleState apply_unchecked(const ScheduleState &s, const Transformation &t);

// Smallest factor in [1, max_factor] such that p carries every dependence
// not already carried before p (so the loop at q can then run parallel).
// nullopt when no factor works.
std::optional<int64_t> solve_skew_parallel(const DependenceSet &deps, int p, int q,
                                           int64_t max_factor);

// Factor in [0, max_factor] minimizing the L1 norm of the skewed component;
// ties resolve toward the smaller factor. 0 means "leave the loop alone".
int64_t solve_skew_locality(const DependenceSet &deps, int p, int q, int64_t max_factor);

// All legal candidates of `kind` for one nest of `p` under state `s`, in a
// deterministic order (lexicographic on parameters).
std::vector<Transformation> enumerate_candidates(const Program &p, const ScheduleState &s,
                                                 int nest, Kind kind,
                                                 const TransformSpaceConfig &cfg,
                                                 const std::vector<DependenceSet> &deps);

// Canonical text for the reached configuration: (U, tiling, unroll,
// parallel) per nest. States reached by different step orders but landing on
// identical configurations share a signature.
std::string signature(const ScheduleState &s);

// Serialization of steps (JSON object per step). Parallelization steps also
// carry the post-tiling depth they were formed against, which downstream
// analyses need once the program itself is out of reach.
std::string step_to_json(const Transformation &t);
Transformation step_from_json_text(const std::string &text);
std::string schedule_to_json_array(const std::vector<Transformation> &steps);

}  // namespace nestopt

#endif
