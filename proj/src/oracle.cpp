#include "nestopt/oracle.hpp"

#include <algorithm>

namespace nestopt {

namespace {

int64_t floordiv(int64_t a, int64_t b) {
    int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) q--;
    return q;
}

// Position of iteration x in the transformed execution order: apply U, then
// lay the coordinates out as the post-tiling loop structure does (tile
// counters before point loops).
std::vector<int64_t> order_key(const std::vector<int64_t> &x, const NestSchedule &ns) {
    std::vector<int64_t> y(ns.U.n);
    for (int r = 0; r < ns.U.n; r++) {
        int64_t s = 0;
        for (int c = 0; c < ns.U.n; c++) s += ns.U.at(r, c) * x[c];
        y[r] = s;
    }
    std::vector<int64_t> key;
    for (const TiledLoop &tl : tiled_structure(ns)) {
        if (tl.role == TiledLoop::counter)
            key.push_back(floordiv(y[tl.level], ns.tiling->sizes[tl.level - ns.tiling->band_lo]));
        else
            key.push_back(y[tl.level]);
    }
    return key;
}

bool next_point(std::vector<int64_t> &x, const std::vector<int64_t> &dims) {
    for (int k = static_cast<int>(dims.size()) - 1; k >= 0; k--) {
        if (++x[k] < dims[k]) return true;
        x[k] = 0;
    }
    return false;
}

}  // namespace

bool oracle_legal(const LoopNest &nest, const NestSchedule &ns, int64_t cap) {
    std::vector<int64_t> dims(nest.depth);
    for (int k = 0; k < nest.depth; k++) dims[k] = std::min(nest.extents[k], cap);

    struct Ref {
        const std::vector<int> *off;
        bool write;
        const std::string *array;
    };
    std::vector<Ref> refs;
    for (const AccessPattern &a : nest.accesses)
        for (const auto &o : a.offsets) refs.push_back({&o, a.is_write, &a.array});

    std::optional<int> par = ns.parallel;

    for (size_t i = 0; i < refs.size(); i++) {
        for (size_t j = i + 1; j < refs.size(); j++) {
            if (*refs[i].array != *refs[j].array) continue;
            if (!refs[i].write && !refs[j].write) continue;
            // Iterations a and b touch the same element when
            // a + off_i == b + off_j.
            std::vector<int64_t> delta(nest.depth);
            bool zero = true;
            for (int k = 0; k < nest.depth; k++) {
                delta[k] = static_cast<int64_t>((*refs[i].off)[k]) - (*refs[j].off)[k];
                if (delta[k] != 0) zero = false;
            }
            if (zero) continue;

            std::vector<int64_t> a(nest.depth, 0);
            do {
                std::vector<int64_t> b(nest.depth);
                bool in_range = true;
                for (int k = 0; k < nest.depth; k++) {
                    b[k] = a[k] + delta[k];
                    if (b[k] < 0 || b[k] >= dims[k]) {
                        in_range = false;
                        break;
                    }
                }
                if (!in_range) continue;

                // Source = whichever ran first originally.
                const std::vector<int64_t> &src = (a < b) ? a : b;
                const std::vector<int64_t> &snk = (a < b) ? b : a;
                std::vector<int64_t> ks = order_key(src, ns);
                std::vector<int64_t> kt = order_key(snk, ns);
                if (!(ks < kt)) return false;
                if (par) {
                    bool equal_before = true;
                    for (int k = 0; k < *par; k++)
                        if (ks[k] != kt[k]) {
                            equal_before = false;
                            break;
                        }
                    if (equal_before && ks[*par] != kt[*par]) return false;
                }
            } while (next_point(a, dims));
        }
    }
    return true;
}

bool oracle_legal(const Program &p, const ScheduleState &s, int64_t cap) {
    for (size_t i = 0; i < p.nests.size(); i++)
        if (!oracle_legal(p.nests[i], s.nests[i], cap)) return false;
    return true;
}

}  // namespace nestopt
