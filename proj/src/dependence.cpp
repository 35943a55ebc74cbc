#include "nestopt/dependence.hpp"

#include <algorithm>
#include <stdexcept>

namespace nestopt {

bool is_lex_positive(const DistVec &v) {
    for (int64_t x : v) {
        if (x > 0) return true;
        if (x < 0) return false;
    }
    return false;
}

bool is_lex_negative(const DistVec &v) {
    for (int64_t x : v) {
        if (x < 0) return true;
        if (x > 0) return false;
    }
    return false;
}

DependenceSet compute_dependences(const LoopNest &nest) {
    // Flatten per-array references. One entry per offset vector.
    struct Ref {
        const std::vector<int> *off;
        bool write;
    };
    std::vector<std::pair<std::string, Ref>> refs;
    for (const AccessPattern &a : nest.accesses)
        for (const auto &o : a.offsets) refs.push_back({a.array, {&o, a.is_write}});

    DependenceSet out;
    for (size_t i = 0; i < refs.size(); i++) {
        for (size_t j = i + 1; j < refs.size(); j++) {
            if (refs[i].first != refs[j].first) continue;
            const Ref &ri = refs[i].second;
            const Ref &rj = refs[j].second;
            if (!ri.write && !rj.write) continue;
            if (ri.off->size() != static_cast<size_t>(nest.depth) ||
                rj.off->size() != static_cast<size_t>(nest.depth))
                throw std::invalid_argument("access offset length does not match nest depth");
            DistVec d(nest.depth);
            bool zero = true;
            for (int k = 0; k < nest.depth; k++) {
                d[k] = static_cast<int64_t>((*ri.off)[k]) - (*rj.off)[k];
                if (d[k] != 0) zero = false;
            }
            if (zero) continue;  // same element, same iteration
            // Keep the orientation in which the source runs first. One of
            // +-d is always lexicographically positive for d != 0.
            if (!is_lex_positive(d))
                for (auto &x : d) x = -x;
            out.distances.push_back(std::move(d));
        }
    }
    std::sort(out.distances.begin(), out.distances.end());
    out.distances.erase(std::unique(out.distances.begin(), out.distances.end()),
                        out.distances.end());
    return out;
}

std::vector<DistVec> transform_distances(const DependenceSet &deps, const IntMatrix &U) {
    std::vector<DistVec> out;
    out.reserve(deps.distances.size());
    for (const DistVec &d : deps.distances) out.push_back(U.apply(d));
    return out;
}

bool parallel_legal(const std::vector<DistVec> &distances, int level) {
    for (const DistVec &v : distances) {
        if (level >= static_cast<int>(v.size()))
            throw std::out_of_range("parallel level exceeds distance dimension");
        bool zeros_before = true;
        for (int k = 0; k < level; k++)
            if (v[k] != 0) {
                zeros_before = false;
                break;
            }
        if (zeros_before && v[level] != 0) return false;
    }
    return true;
}

bool band_permutable(const std::vector<DistVec> &distances, int band_lo, int band_hi) {
    for (const DistVec &v : distances) {
        if (band_hi >= static_cast<int>(v.size()) || band_lo < 0 || band_lo > band_hi)
            throw std::out_of_range("band out of range");
        bool carried_before = false;
        for (int k = 0; k < band_lo; k++) {
            if (v[k] > 0) {
                carried_before = true;
                break;
            }
            if (v[k] < 0) break;  // lex-negative prefix: definitely not permutable
        }
        if (carried_before) continue;
        for (int k = band_lo; k <= band_hi; k++)
            if (v[k] < 0) return false;
    }
    return true;
}

}  // namespace nestopt
