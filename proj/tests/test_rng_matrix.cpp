#include <doctest.h>

#include <set>
#include <vector>

#include "nestopt/matrix.hpp"
#include "nestopt/rng.hpp"

using namespace nestopt;

TEST_CASE("rng sequences are reproducible and seed-sensitive") {
    Rng a(42), b(42), c(43);
    bool any_diff = false;
    for (int i = 0; i < 64; i++) {
        uint64_t va = a.next_u64();
        CHECK(va == b.next_u64());
        if (va != c.next_u64()) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("bounded and range stay inside their intervals and hit endpoints") {
    Rng r(7);
    std::set<int64_t> seen;
    for (int i = 0; i < 4000; i++) {
        uint64_t v = r.bounded(5);
        CHECK(v < 5);
        int64_t w = r.range(-2, 2);
        CHECK(w >= -2);
        CHECK(w <= 2);
        seen.insert(w);
    }
    CHECK(seen.size() == 5);
}

TEST_CASE("unit draws lie in [0, 1)") {
    Rng r(11);
    for (int i = 0; i < 1000; i++) {
        double u = r.unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("weighted never selects a zero-weight index") {
    Rng r(3);
    for (int i = 0; i < 2000; i++) {
        size_t k = r.weighted({0.0, 2.0, 0.0, 1.0});
        CHECK((k == 1 || k == 3));
    }
}

TEST_CASE("derive_seed gives collision-free per-index seeds") {
    std::set<uint64_t> seeds;
    for (uint64_t i = 0; i < 10000; i++) seeds.insert(derive_seed(123456789ULL, i));
    CHECK(seeds.size() == 10000);
    CHECK(derive_seed(1, 5) != derive_seed(2, 5));
}

namespace {

IntMatrix random_unimodular(Rng &r, int n, int ops) {
    IntMatrix u = IntMatrix::identity(n);
    for (int i = 0; i < ops; i++) {
        switch (r.bounded(3)) {
        case 0: {  // swap two rows
            int p = static_cast<int>(r.bounded(n));
            int q = static_cast<int>(r.bounded(n));
            if (p == q) break;
            for (int c = 0; c < n; c++) std::swap(u.at(p, c), u.at(q, c));
            break;
        }
        case 1: {  // negate one row
            int p = static_cast<int>(r.bounded(n));
            for (int c = 0; c < n; c++) u.at(p, c) = -u.at(p, c);
            break;
        }
        default: {  // integer shear
            int p = static_cast<int>(r.bounded(n));
            int q = static_cast<int>(r.bounded(n));
            if (p == q) break;
            int64_t f = r.range(1, 3);
            for (int c = 0; c < n; c++) u.at(p, c) += f * u.at(q, c);
            break;
        }
        }
    }
    return u;
}

}  // namespace

TEST_CASE("elementary row operations keep the determinant at +-1") {
    Rng r(99);
    for (int trial = 0; trial < 50; trial++) {
        int n = static_cast<int>(r.range(1, 4));
        IntMatrix u = random_unimodular(r, n, 8);
        int64_t d = u.det();
        CHECK((d == 1 || d == -1));
    }
}

TEST_CASE("inverse_unimodular inverts on both sides") {
    Rng r(100);
    for (int trial = 0; trial < 50; trial++) {
        int n = static_cast<int>(r.range(1, 4));
        IntMatrix u = random_unimodular(r, n, 10);
        IntMatrix inv = u.inverse_unimodular();
        CHECK(u.mul(inv).is_identity());
        CHECK(inv.mul(u).is_identity());
    }
}

TEST_CASE("inverse_unimodular rejects singular and non-unimodular input") {
    IntMatrix z(2);  // all zeros
    CHECK_THROWS_AS(z.inverse_unimodular(), std::logic_error);
    IntMatrix two = IntMatrix::identity(2);
    two.at(0, 0) = 2;
    CHECK_THROWS_AS(two.inverse_unimodular(), std::logic_error);
}

TEST_CASE("signed permutation detection separates shears from reorderings") {
    IntMatrix u = IntMatrix::identity(3);
    CHECK(u.is_signed_permutation());
    for (int c = 0; c < 3; c++) std::swap(u.at(0, c), u.at(2, c));
    CHECK(u.is_signed_permutation());
    for (int c = 0; c < 3; c++) u.at(1, c) = -u.at(1, c);
    CHECK(u.is_signed_permutation());
    for (int c = 0; c < 3; c++) u.at(0, c) += u.at(1, c);
    CHECK(!u.is_signed_permutation());
}

TEST_CASE("apply computes the matrix-vector product") {
    IntMatrix u = IntMatrix::identity(2);
    u.at(0, 1) = 1;  // (i, j) -> (i + j, j)
    std::vector<int64_t> v = {3, 4};
    CHECK(u.apply(v) == std::vector<int64_t>{7, 4});
    CHECK_THROWS_AS(u.apply({1, 2, 3}), std::invalid_argument);
}
