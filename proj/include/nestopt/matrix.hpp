#ifndef NESTOPT_MATRIX_HPP
#define NESTOPT_MATRIX_HPP

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace nestopt {

// Dense square integer matrix, sized for loop depths (n <= 4 in practice).
// Schedules accumulate row operations on these; legality and stride queries
// need exact integer determinants and inverses, so everything stays in int64.
struct IntMatrix {
    int n = 0;
    std::vector<int64_t> a;  // row-major, n*n

    IntMatrix() = default;
    explicit IntMatrix(int dim) : n(dim), a(static_cast<size_t>(dim) * dim, 0) {}

    static IntMatrix identity(int dim) {
        IntMatrix m(dim);
        for (int i = 0; i < dim; i++) m.at(i, i) = 1;
        return m;
    }

    int64_t &at(int r, int c) { return a[static_cast<size_t>(r) * n + c]; }
    int64_t at(int r, int c) const { return a[static_cast<size_t>(r) * n + c]; }

    bool operator==(const IntMatrix &o) const { return n == o.n && a == o.a; }

    std::vector<int64_t> apply(const std::vector<int64_t> &v) const {
        if (static_cast<int>(v.size()) != n)
            throw std::invalid_argument("matrix/vector dimension mismatch");
        std::vector<int64_t> out(n, 0);
        for (int r = 0; r < n; r++) {
            int64_t s = 0;
            for (int c = 0; c < n; c++) s += at(r, c) * v[c];
            out[r] = s;
        }
        return out;
    }

    IntMatrix mul(const IntMatrix &o) const {
        if (n != o.n) throw std::invalid_argument("matrix dimension mismatch");
        IntMatrix out(n);
        for (int r = 0; r < n; r++)
            for (int c = 0; c < n; c++) {
                int64_t s = 0;
                for (int k = 0; k < n; k++) s += at(r, k) * o.at(k, c);
                out.at(r, c) = s;
            }
        return out;
    }

    // Cofactor expansion; fine for n <= 4.
    int64_t det() const {
        if (n == 0) return 1;
        if (n == 1) return a[0];
        int64_t d = 0;
        for (int c = 0; c < n; c++) {
            IntMatrix m = minor_matrix(0, c);
            int64_t term = at(0, c) * m.det();
            d += (c % 2 == 0) ? term : -term;
        }
        return d;
    }

    // Inverse of a unimodular matrix via the adjugate. det must be +-1, which
    // row swaps / negations / integer shears preserve.
    IntMatrix inverse_unimodular() const {
        int64_t d = det();
        if (d != 1 && d != -1)
            throw std::logic_error("inverse_unimodular: matrix is not unimodular");
        IntMatrix inv(n);
        for (int r = 0; r < n; r++)
            for (int c = 0; c < n; c++) {
                int64_t cof = minor_matrix(r, c).det();
                if ((r + c) % 2 != 0) cof = -cof;
                inv.at(c, r) = cof * d;  // d == 1/d for +-1
            }
        return inv;
    }

    bool is_identity() const {
        for (int r = 0; r < n; r++)
            for (int c = 0; c < n; c++)
                if (at(r, c) != (r == c ? 1 : 0)) return false;
        return true;
    }

    // True when every row and column holds exactly one +-1 entry, i.e. the
    // matrix is a composition of interchanges and reversals with no shear.
    bool is_signed_permutation() const {
        std::vector<int> col_hits(n, 0);
        for (int r = 0; r < n; r++) {
            int nz = 0;
            for (int c = 0; c < n; c++) {
                int64_t v = at(r, c);
                if (v == 0) continue;
                if (v != 1 && v != -1) return false;
                nz++;
                col_hits[c]++;
            }
            if (nz != 1) return false;
        }
        for (int c = 0; c < n; c++)
            if (col_hits[c] != 1) return false;
        return true;
    }

  private:
    IntMatrix minor_matrix(int row, int col) const {
        IntMatrix m(n - 1);
        int rr = 0;
        for (int r = 0; r < n; r++) {
            if (r == row) continue;
            int cc = 0;
            for (int c = 0; c < n; c++) {
                if (c == col) continue;
                m.at(rr, cc) = at(r, c);
                cc++;
            }
            rr++;
        }
        return m;
    }
};

}  // namespace nestopt

#endif
