#ifndef NESTOPT_RNG_HPP
#define NESTOPT_RNG_HPP

#include <cstdint>
#include <vector>

namespace nestopt {

// splitmix64 step. Bijective on 64-bit states, so distinct inputs can never
// collide; we lean on that for per-index sub-seed derivation.
inline uint64_t splitmix64(uint64_t &state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic sub-seed for element `index` of a sequence rooted at `base`.
// Prefix stability falls out of this: element i only ever sees seed(base, i).
inline uint64_t derive_seed(uint64_t base, uint64_t index) {
    uint64_t s = base ^ (index * 0xD1B54A32D192ED03ULL + 0x9E3779B97F4A7C15ULL);
    return splitmix64(s);
}

// Small self-contained generator. We avoid <random> distributions on purpose:
// their outputs are not pinned by the standard, and corpus regeneration must
// be bit-identical.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {
        // Warm up so that small seeds do not feed near-zero states straight
        // into the first draw.
        next_u64();
    }

    uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, n). Multiply-shift reduction; the bias for n << 2^64 is
    // far below anything observable here.
    uint64_t bounded(uint64_t n) {
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Uniform integer in [lo, hi], inclusive.
    int64_t range(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(bounded(static_cast<uint64_t>(hi - lo + 1)));
    }

    double unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Index drawn proportionally to non-negative weights. Weights summing to
    // zero are a caller bug.
    size_t weighted(const std::vector<double> &weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double r = unit() * total;
        double acc = 0.0;
        for (size_t i = 0; i < weights.size(); i++) {
            acc += weights[i];
            if (r < acc) return i;
        }
        return weights.size() - 1;
    }

  private:
    uint64_t state_;
};

}  // namespace nestopt

#endif
