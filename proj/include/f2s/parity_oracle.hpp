#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "f2s/oracle.hpp"
#include "f2s/point.hpp"
#include "f2s/rng.hpp"

namespace f2s {

// Shared voting table of one list-decoding run: X_1..X_t and all subset sums
// X^S. Every candidate decoder over this table votes with the same base
// queries, so batched evaluation shares one query sweep across all 2^t
// offset patterns.
class VotingTable {
  public:
    VotingTable(std::shared_ptr<const SetOracle> base, std::vector<Point> xs)
        : base_(std::move(base)), xs_(std::move(xs)) {
        uint32_t t = static_cast<uint32_t>(xs_.size());
        if (t == 0 || t > 20) throw std::invalid_argument("VotingTable: t out of range");
        subset_xor_.reserve(size_t{1} << t);
        subset_xor_.push_back(Point::zero(base_->dim()));
        for (uint64_t s = 1; s < (uint64_t{1} << t); ++s) {
            uint64_t low = s & (~s + 1);
            uint32_t i = static_cast<uint32_t>(std::countr_zero(low));
            subset_xor_.push_back(subset_xor_[s ^ low] ^ xs_[i]);
        }
    }

    uint32_t t() const { return static_cast<uint32_t>(xs_.size()); }
    size_t voters() const { return subset_xor_.size() - 1; }  // 2^t - 1, odd
    const SetOracle& base() const { return *base_; }
    std::shared_ptr<const SetOracle> base_ptr() const { return base_; }
    const std::vector<Point>& table() const { return xs_; }

    // votes[s] = A(X^S + p) for every nonempty S; (2^t - 1) base queries.
    std::vector<uint8_t> vote_vector(const Point& p) const {
        std::vector<uint8_t> v(subset_xor_.size());
        for (size_t s = 1; s < subset_xor_.size(); ++s)
            v[s] = static_cast<uint8_t>(base_->query(subset_xor_[s] ^ p));
        return v;
    }

    // maj over nonempty S of votes[s] xor <b, s>.
    static int decode(const std::vector<uint8_t>& votes, uint32_t b) {
        size_t ones = 0;
        for (size_t s = 1; s < votes.size(); ++s)
            ones += votes[s] ^ (std::popcount(b & static_cast<uint32_t>(s)) & 1);
        return ones > (votes.size() - 1) / 2 ? 1 : 0;
    }

    // All candidates at once: D_b(p) for b in [0, 2^t). The vote signs are
    // transformed over the t-cube; the b-th output is the majority sign.
    static std::vector<uint8_t> decode_all(const std::vector<uint8_t>& votes) {
        std::vector<int32_t> e(votes.size());
        e[0] = 0;
        for (size_t s = 1; s < votes.size(); ++s) e[s] = votes[s] ? -1 : 1;
        for (size_t h = 1; h < e.size(); h <<= 1)
            for (size_t i = 0; i < e.size(); i += h << 1)
                for (size_t j = i; j < i + h; ++j) {
                    int32_t a = e[j], bb = e[j + h];
                    e[j] = a + bb;
                    e[j + h] = a - bb;
                }
        // sum of (v_s xor <b,s>) over s != 0 exceeds half iff the signed sum
        // is negative; the voter count is odd so ties cannot occur
        std::vector<uint8_t> out(e.size());
        for (size_t b = 0; b < e.size(); ++b) out[b] = e[b] < 0 ? 1 : 0;
        return out;
    }

  private:
    std::shared_ptr<const SetOracle> base_;
    std::vector<Point> xs_;
    std::vector<Point> subset_xor_;
};

// Candidate decoder D_b(x) = maj_S { A(X^S + x) + b^S }. A null table means
// the constant-0 decoder (the canonical candidate for the empty parity).
class Decoder {
  public:
    Decoder() = default;
    Decoder(std::shared_ptr<const VotingTable> table, uint32_t b)
        : table_(std::move(table)), b_(b) {}

    static Decoder trivial() { return Decoder(); }
    bool is_trivial() const { return table_ == nullptr; }

    uint32_t offsets() const { return b_; }
    const std::shared_ptr<const VotingTable>& table() const { return table_; }
    size_t queries_per_eval() const { return table_ ? table_->voters() : 0; }

    int eval(const Point& x) const {
        if (!table_) return 0;
        return VotingTable::decode(table_->vote_vector(x), b_);
    }

  private:
    std::shared_ptr<const VotingTable> table_;
    uint32_t b_ = 0;
};

// Probabilistic oracle machine for a hidden parity chi_alpha, built by local
// correction of a decoder: m banks of R trials, each trial
// D(x + y) + D(y) with the y's drawn once at construction and the D(y) bits
// cached. Per-call base-query cost is exactly (2^t - 1) * R * m. The global
// complement of a near-affine decoder cancels in the correction, so the
// machine computes the underlying parity bit either way.
class ParityOracle {
  public:
    ParityOracle(Decoder d, uint32_t correction_reps, uint32_t amplification,
                 RandomSource rng)
        : d_(std::move(d)), r_(correction_reps), m_(amplification) {
        if (r_ % 2 == 0 || m_ % 2 == 0)
            throw std::invalid_argument("ParityOracle: R and m must be odd");
        if (!d_.is_trivial()) {
            uint32_t n = d_.table()->base().dim();
            ys_.reserve(size_t{r_} * m_);
            cached_.reserve(size_t{r_} * m_);
            for (size_t i = 0; i < size_t{r_} * m_; ++i) {
                Point y = rng.point(n);
                ys_.push_back(y);
                cached_.push_back(static_cast<uint8_t>(d_.eval(y)));
            }
        }
    }

    static ParityOracle trivial(uint32_t n) { return ParityOracle(n); }
    bool is_trivial() const { return d_.is_trivial(); }

    // Rebuild from serialized parts; the cached bits make the reload exact
    // without fresh base queries.
    static ParityOracle from_parts(Decoder d, uint32_t correction_reps, uint32_t amplification,
                                   std::vector<Point> ys, std::vector<uint8_t> cached) {
        ParityOracle o(0);
        o.d_ = std::move(d);
        o.r_ = correction_reps;
        o.m_ = amplification;
        o.ys_ = std::move(ys);
        o.cached_ = std::move(cached);
        if (o.ys_.size() != size_t{o.r_} * o.m_ || o.cached_.size() != o.ys_.size())
            throw std::invalid_argument("ParityOracle::from_parts: size mismatch");
        return o;
    }

    uint32_t correction_reps() const { return r_; }
    uint32_t amplification() const { return m_; }
    const Decoder& decoder() const { return d_; }
    const std::vector<Point>& correction_points() const { return ys_; }
    const std::vector<uint8_t>& cached_bits() const { return cached_; }

    // m = 2*ceil(6 ln(1/delta_point)) + 1 majority votes reach pointwise
    // confidence 1 - delta_point from a 2/3-correct base machine.
    static uint32_t amplification_for(double delta_point) {
        if (delta_point >= 1.0 / 3.0) return 1;
        return 2 * static_cast<uint32_t>(std::ceil(6.0 * std::log(1.0 / delta_point))) + 1;
    }

    int evaluate(const Point& x) const {
        if (d_.is_trivial()) return 0;
        uint32_t bank_ones = 0;
        for (uint32_t j = 0; j < m_; ++j) {
            uint32_t ones = 0;
            for (uint32_t t = 0; t < r_; ++t) {
                size_t i = size_t{j} * r_ + t;
                ones += static_cast<uint32_t>(d_.eval(x ^ ys_[i]) ^ cached_[i]);
            }
            bank_ones += ones > r_ / 2 ? 1 : 0;
        }
        return bank_ones > m_ / 2 ? 1 : 0;
    }

    size_t queries_per_eval() const { return d_.queries_per_eval() * r_ * m_; }

  private:
    explicit ParityOracle(uint32_t n) : d_(Decoder::trivial()), r_(1), m_(1), n_trivial_(n) {}

    Decoder d_;
    uint32_t r_;
    uint32_t m_;
    uint32_t n_trivial_ = 0;
    std::vector<Point> ys_;
    std::vector<uint8_t> cached_;
};

// Reads the hidden parity vector off an oracle by probing unit vectors.
inline Point read_parity(const ParityOracle& o, uint32_t n) {
    Point alpha(n);
    for (uint32_t i = 1; i <= n; ++i)
        alpha.set_bit(n - i, o.evaluate(Point::unit(n, i)));
    return alpha;
}

}  // namespace f2s
