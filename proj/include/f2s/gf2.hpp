#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "f2s/point.hpp"
#include "f2s/rng.hpp"

namespace f2s {

// Row-major matrix over F2; rows are Points of a common dimension N.
class GF2Matrix {
  public:
    GF2Matrix() = default;
    explicit GF2Matrix(std::vector<Point> rows) : rows_(std::move(rows)) {
        for (const auto& r : rows_) r.check_dim(rows_.front());
    }

    size_t row_count() const { return rows_.size(); }
    uint32_t col_count() const { return rows_.empty() ? 0 : rows_.front().dim(); }
    const std::vector<Point>& rows() const { return rows_; }

    void add_row(const Point& p) {
        if (!rows_.empty()) p.check_dim(rows_.front());
        rows_.push_back(p);
    }

    uint32_t rank() const {
        std::vector<Point> work = rows_;
        return eliminate(work).size();
    }

    // Pivot columns of the row space, fully reduced rows (RREF order).
    static std::vector<std::pair<uint32_t, Point>> rref(std::vector<Point> work) {
        std::vector<std::pair<uint32_t, size_t>> pivots;
        uint32_t cols = work.empty() ? 0 : work.front().dim();
        size_t r = 0;
        for (uint32_t c = cols; c-- > 0 && r < work.size();) {
            size_t p = r;
            while (p < work.size() && work[p].bit(c) == 0) ++p;
            if (p == work.size()) continue;
            std::swap(work[r], work[p]);
            for (size_t i = 0; i < work.size(); ++i)
                if (i != r && work[i].bit(c)) work[i] ^= work[r];
            pivots.emplace_back(c, r);
            ++r;
        }
        std::vector<std::pair<uint32_t, Point>> out;
        out.reserve(pivots.size());
        for (auto& [c, idx] : pivots) out.emplace_back(c, work[idx]);
        return out;
    }

  private:
    static std::vector<Point> eliminate(std::vector<Point>& work) {
        std::vector<Point> basis;
        for (auto& row : work) {
            Point v = row;
            for (const auto& b : basis) {
                uint32_t c = leading_bit(b);
                if (v.bit(c)) v ^= b;
            }
            if (!v.is_zero()) basis.push_back(v);
        }
        return basis;
    }

    static uint32_t leading_bit(const Point& p) {
        for (uint32_t j = p.dim(); j-- > 0;)
            if (p.bit(j)) return j;
        return 0;
    }

    std::vector<Point> rows_;
};

inline uint32_t gf2_rank(const GF2Matrix& m) { return m.rank(); }

// Solution structure of <x, a_i> = b_i: one particular solution plus a basis
// of the null space of span{a_i}.
struct LinearSystem {
    Point particular;
    std::vector<Point> null_basis;

    // Particular solution shifted by a fixed combination of null basis vectors.
    Point solution_for(uint64_t combo) const {
        Point x = particular;
        for (size_t j = 0; j < null_basis.size(); ++j)
            if ((combo >> j) & 1) x ^= null_basis[j];
        return x;
    }
};

// Gaussian elimination for <x, parities[i]> = b[i]. Requires the parities to
// be linearly independent; throws std::invalid_argument otherwise.
inline LinearSystem solve_parity_system(const std::vector<Point>& parities,
                                        const std::vector<int>& b) {
    if (parities.empty()) throw std::invalid_argument("solve_parity_system: empty system");
    if (parities.size() != b.size())
        throw std::invalid_argument("solve_parity_system: size mismatch");
    uint32_t n = parities.front().dim();
    size_t k = parities.size();
    if (k > n) throw std::invalid_argument("solve_parity_system: more constraints than dimensions");

    // Augmented rows: parity bit j at position j+1, target bit at position 0,
    // so column elimination (high to low) pivots on variables before the
    // augment column.
    std::vector<Point> aug;
    aug.reserve(k);
    for (size_t i = 0; i < k; ++i) {
        Point row(n + 1);
        for (uint32_t j = 0; j < n; ++j) row.set_bit(j + 1, parities[i].bit(j));
        row.set_bit(0, b[i] & 1);
        aug.push_back(row);
    }

    auto reduced = GF2Matrix::rref(std::move(aug));
    std::vector<char> is_pivot(n, 0);
    for (auto& [c, row] : reduced) {
        if (c == 0) throw std::invalid_argument("solve_parity_system: inconsistent system");
        is_pivot[c - 1] = 1;
    }
    if (reduced.size() != k)
        throw std::invalid_argument("solve_parity_system: dependent parities");

    Point particular(n);
    for (auto& [c, row] : reduced) particular.set_bit(c - 1, row.bit(0));

    std::vector<Point> null_basis;
    for (uint32_t f = 0; f < n; ++f) {
        if (is_pivot[f]) continue;
        Point v(n);
        v.set_bit(f, 1);
        for (auto& [c, row] : reduced)
            if (row.bit(f + 1)) v.set_bit(c - 1, 1);
        null_basis.push_back(v);
    }
    return {particular, null_basis};
}

// Uniform sample from the coset {x : <x, parities[i]> = b_i}.
inline Point coset_solve(const std::vector<Point>& parities, const std::vector<int>& b,
                         RandomSource& rng) {
    LinearSystem sys = solve_parity_system(parities, b);
    Point x = sys.particular;
    size_t d = sys.null_basis.size();
    size_t j = 0;
    while (j < d) {
        uint64_t w = rng.u64();
        for (size_t t = 0; t < 64 && j < d; ++t, ++j)
            if ((w >> t) & 1) x ^= sys.null_basis[j];
    }
    return x;
}

}  // namespace f2s
