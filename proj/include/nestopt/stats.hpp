#ifndef NESTOPT_STATS_HPP
#define NESTOPT_STATS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nestopt/datapoint.hpp"

namespace nestopt {

// Fixed axis order for the transition matrix and everything derived from it.
extern const std::array<Kind, 6> kKindOrder;

struct ParallelDepthBin {
    double bin_center = 0.0;  // 10 bins over [0, 1]
    double mean = 0.0;
    size_t n = 0;
};

// Per-program best parallel points, bucketed by the relative level of the
// parallelized loop.
std::vector<ParallelDepthBin> analyze_parallel_depth(const std::vector<DataPoint> &points);

struct SkewReport {
    // Points containing skewing, split by whether a parallelization step
    // follows the skew.
    std::optional<double> mean_skew_with_parallel;
    std::optional<double> mean_skew_without_parallel;
    std::optional<double> ratio;  // with / without, when both exist
    size_t n_skew_with_parallel = 0;
    size_t n_skew_without_parallel = 0;
    // Points containing parallelization, split by whether a skew precedes it.
    std::optional<double> mean_parallel_with_prior_skew;
    std::optional<double> mean_parallel_without_prior_skew;
    size_t n_parallel_with_prior_skew = 0;
    size_t n_parallel_without_prior_skew = 0;
};

SkewReport analyze_skewing(const std::vector<DataPoint> &points);

struct UnrollRow {
    int64_t factor = 0;
    double mean = 0.0;
    size_t n = 0;
};

std::vector<UnrollRow> analyze_unrolling(const std::vector<DataPoint> &points);

struct LengthRow {
    size_t length = 0;
    double mean = 0.0;
    double max = 0.0;
    size_t n = 0;
};

struct LengthReport {
    // Histogram over the length of each program's best schedule.
    std::vector<std::pair<size_t, size_t>> best_length_histogram;  // (length, count)
    // Mean / max speedup over all points of a given length.
    std::vector<LengthRow> per_length;
};

LengthReport analyze_schedule_length(const std::vector<DataPoint> &points);

struct TransitionMatrix {
    std::array<Kind, 6> kinds = {Kind::interchange, Kind::reversal,    Kind::skewing,
                                 Kind::tiling,      Kind::unrolling,   Kind::parallelization};
    double raw[6][6] = {};     // mean speedup of schedules containing i->j
    double prob[6][6] = {};    // raw, row-normalized; zero rows stay zero
    int64_t counts[6][6] = {}; // schedules containing i->j
};

// Each schedule contributes its speedup once per distinct adjacent kind pair
// it contains.
TransitionMatrix transition_matrix(const std::vector<DataPoint> &points);

struct OrderedKind {
    Kind kind;
    bool repeatable = false;  // row argmax is the self-transition
};

// Greedy walk over the probability matrix: start at the kind with the
// largest off-diagonal row maximum, repeatedly hop to the unvisited
// non-parallelization kind with the highest outgoing probability (ties in
// fixed kind order), then append parallelization. A zero matrix falls back
// to the fixed kind order.
std::vector<OrderedKind> derive_order(const TransitionMatrix &tm);

struct StatsReport {
    std::vector<ParallelDepthBin> parallel_depth;
    SkewReport skew;
    std::vector<UnrollRow> unroll;
    LengthReport length;
    TransitionMatrix transitions;
    std::vector<OrderedKind> derived_order;
};

StatsReport analyze_all(const std::vector<DataPoint> &points);

std::string report_to_json(const StatsReport &r);

// Writes fig1/fig3/fig5/fig6/fig7/skew CSV files into `dir`. Empty inputs
// produce header-only files. The three-argument form restricts emission to
// one report: "parallel-depth" (fig1), "unrolling" (fig3), "length" (fig5 +
// fig6), "transitions" (fig7), "skewing" (skew.csv), or "all".
void emit_csv(const StatsReport &r, const std::string &dir);
void emit_csv(const StatsReport &r, const std::string &dir, const std::string &only);

}  // namespace nestopt

#endif
