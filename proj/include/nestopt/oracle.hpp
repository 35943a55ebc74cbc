#ifndef NESTOPT_ORACLE_HPP
#define NESTOPT_ORACLE_HPP

#include "nestopt/transforms.hpp"

namespace nestopt {

// Ground-truth legality by brute force: enumerate every concrete dependent
// iteration pair of the nest (extents clamped to `cap`), then check that the
// transformed execution order runs each source before its sink and that no
// pair straddles the parallel loop. Deliberately knows nothing about
// distance vectors; it exists to keep the matrix-based checks honest.
bool oracle_legal(const LoopNest &nest, const NestSchedule &ns, int64_t cap = 5);

// Whole-state variant: every nest must pass.
bool oracle_legal(const Program &p, const ScheduleState &s, int64_t cap = 5);

}  // namespace nestopt

#endif
