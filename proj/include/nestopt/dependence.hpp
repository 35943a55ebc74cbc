#ifndef NESTOPT_DEPENDENCE_HPP
#define NESTOPT_DEPENDENCE_HPP

#include <cstdint>
#include <vector>

#include "nestopt/ir.hpp"
#include "nestopt/matrix.hpp"

namespace nestopt {

using DistVec = std::vector<int64_t>;

bool is_lex_positive(const DistVec &v);
bool is_lex_negative(const DistVec &v);

// Set of uniform dependence distance vectors for one nest. Every member is
// lexicographically positive (source precedes sink in the original order);
// the zero vector is excluded. Kept sorted and deduplicated.
struct DependenceSet {
    std::vector<DistVec> distances;

    bool empty() const { return distances.empty(); }
    size_t size() const { return distances.size(); }
};

// Distances between every (write, other-access) offset pair on the same
// array. With identity-plus-offset maps each pair yields one constant
// distance; we keep the lexicographically positive orientation so that both
// flow and anti direction constraints are preserved.
DependenceSet compute_dependences(const LoopNest &nest);

// Images U*v of every distance, in the set's order. Not re-oriented: a
// lexicographically negative image is exactly how an illegal schedule shows
// up.
std::vector<DistVec> transform_distances(const DependenceSet &deps, const IntMatrix &U);

// No dependence is carried at `level`: there is no vector with zeros before
// `level` and a nonzero at it. Components inside deeper loops are free.
bool parallel_legal(const std::vector<DistVec> &distances, int level);

// Every vector is either carried before band_lo or has all components in
// [band_lo, band_hi] >= 0. The classic sufficient condition for rectangular
// tiling of the band.
bool band_permutable(const std::vector<DistVec> &distances, int band_lo, int band_hi);

}  // namespace nestopt

#endif
