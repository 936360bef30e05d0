#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "f2s/point.hpp"

namespace f2s {

// Counted black-box membership access to a set A in F2^n. Every query() bumps
// the meter by exactly one; the meter is the artifact's central performance
// measurement. Thread-safe for concurrent queries.
class SetOracle {
  public:
    virtual ~SetOracle() = default;

    explicit SetOracle(uint32_t n) : n_(n) {}

    uint32_t dim() const { return n_; }

    int query(const Point& x) const {
        if (x.dim() != n_) throw std::invalid_argument("SetOracle::query: dimension mismatch");
        count_.fetch_add(1, std::memory_order_relaxed);
        return eval(x);
    }

    uint64_t query_count() const { return count_.load(std::memory_order_relaxed); }
    void reset_count() const { count_.store(0, std::memory_order_relaxed); }

  protected:
    virtual int eval(const Point& x) const = 0;

  private:
    uint32_t n_;
    mutable std::atomic<uint64_t> count_{0};
};

// Exhaustive bitset realization; the brute-force reference regime. Immutable
// after construction and safely shareable.
class StoredSet {
  public:
    static constexpr uint32_t kMaxDim = 24;

    explicit StoredSet(uint32_t n) : n_(n), bits_((size() + 63) / 64, 0) {
        if (n == 0 || n > kMaxDim) throw std::invalid_argument("StoredSet: n must be in [1,24]");
    }

    uint32_t dim() const { return n_; }
    uint64_t size() const { return 1ull << n_; }

    void set(uint64_t idx, bool v) {
        uint64_t& w = bits_[idx >> 6];
        uint64_t m = 1ull << (idx & 63);
        w = v ? (w | m) : (w & ~m);
    }

    bool member(uint64_t idx) const { return (bits_[idx >> 6] >> (idx & 63)) & 1; }
    bool member(const Point& x) const { return member(x.index()); }

    uint64_t cardinality() const {
        uint64_t c = 0;
        for (uint64_t w : bits_) c += std::popcount(w);
        return c;
    }

    double volume() const { return static_cast<double>(cardinality()) / static_cast<double>(size()); }

    std::vector<uint64_t> members() const {
        std::vector<uint64_t> out;
        out.reserve(cardinality());
        for (uint64_t i = 0; i < size(); ++i)
            if (member(i)) out.push_back(i);
        return out;
    }

    // 0/1 table indexed by point index.
    std::vector<double> table() const {
        std::vector<double> t(size());
        for (uint64_t i = 0; i < size(); ++i) t[i] = member(i) ? 1.0 : 0.0;
        return t;
    }

    bool operator==(const StoredSet& o) const { return n_ == o.n_ && bits_ == o.bits_; }

  private:
    uint32_t n_;
    std::vector<uint64_t> bits_;
};

class StoredOracle final : public SetOracle {
  public:
    explicit StoredOracle(std::shared_ptr<const StoredSet> s)
        : SetOracle(s->dim()), set_(std::move(s)) {}

    const StoredSet& stored() const { return *set_; }

  protected:
    int eval(const Point& x) const override { return set_->member(x.index()) ? 1 : 0; }

  private:
    std::shared_ptr<const StoredSet> set_;
};

// Membership computed by an arbitrary function; used for synthetic families
// at dimensions beyond the stored regime.
class FunctionOracle final : public SetOracle {
  public:
    FunctionOracle(uint32_t n, std::function<int(const Point&)> fn)
        : SetOracle(n), fn_(std::move(fn)) {}

  protected:
    int eval(const Point& x) const override { return fn_(x) & 1; }

  private:
    std::function<int(const Point&)> fn_;
};

}  // namespace f2s
