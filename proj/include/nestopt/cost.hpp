#ifndef NESTOPT_COST_HPP
#define NESTOPT_COST_HPP

#include <cstdint>
#include <string>

#include "nestopt/transforms.hpp"

namespace nestopt {

// Analytical stand-in for a machine. All knobs are plain rationals and every
// evaluation runs the same fixed-order arithmetic, so a given (program,
// schedule, config) triple always lands on the identical double.
struct MachineConfig {
    int64_t cores = 16;
    int64_t cache_bytes = 1048576;
    int64_t line_elems = 8;      // elements per cache line
    int64_t elem_bytes = 8;
    double miss_penalty = 8.0;   // per missed access
    double loop_overhead = 1.0;  // per loop iteration, per level
    double spawn_cost = 50.0;    // per entry into the parallel loop
    double skew_overhead = 0.5;  // per iteration of a skewed nest
    int64_t registers = 16;
    double ilp_gain_cap = 0.4;
    double ilp_slope = 0.1;      // leaf shrinks by slope*log2(u), capped
    double spill_slope = 0.25;
    double tile_discount = 0.25; // miss-rate multiplier when a tile fits cache
};

MachineConfig load_machine_config(const std::string &path);
std::string machine_config_to_json(const MachineConfig &mc);

// Additive pieces of the model. total() is the canonical evaluation result;
// the six terms sum to it exactly because the evaluator computes them first
// and only then adds them up, in this order.
struct CostBreakdown {
    double work = 0.0;     // statement cost
    double memory = 0.0;   // miss traffic
    double loop = 0.0;     // per-iteration loop overhead
    double spawn = 0.0;    // parallel entry cost
    double skew = 0.0;     // skewed index arithmetic
    double spill = 0.0;    // register pressure from unrolling

    double total() const { return work + memory + loop + spawn + skew + spill; }
};

CostBreakdown evaluate_breakdown(const Program &p, const ScheduleState &s,
                                 const MachineConfig &mc);

// Sum of the breakdown terms. Throws LegalityError on an illegal state.
double evaluate_time(const Program &p, const ScheduleState &s, const MachineConfig &mc);

// evaluate_time(identity) / evaluate_time(s). Identity maps to exactly 1.0.
double speedup(const Program &p, const ScheduleState &s, const MachineConfig &mc);

}  // namespace nestopt

#endif
