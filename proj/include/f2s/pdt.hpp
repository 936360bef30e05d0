#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "f2s/gf2.hpp"
#include "f2s/parity_oracle.hpp"
#include "f2s/point.hpp"

namespace f2s {

struct BudgetExhausted : std::runtime_error {
    explicit BudgetExhausted(const std::string& what) : std::runtime_error(what) {}
};

struct RejectionStall : std::runtime_error {
    explicit RejectionStall(const std::string& what) : std::runtime_error(what) {}
};

// Caps and thresholds of a decomposition run. The per-estimate confidence is
// derived from the total number of randomized steps the caps allow, keeping
// the union bound of the 9/10 guarantee.
struct RegularityBudget {
    double eps = 0.1;
    double tau = 0.1;
    double gamma = -1.0;   // stop fraction; defaults to eps
    uint32_t k_max = 12;   // max codimension
    uint32_t i_max = 0;    // max stages; defaults to ceil(4/eps^3)
    uint32_t route_reps = 5;  // correction trials per implicit routing level

    double stop_fraction() const { return gamma > 0.0 ? gamma : eps; }

    uint32_t max_stages() const {
        if (i_max > 0) return i_max;
        return static_cast<uint32_t>(std::ceil(4.0 / (eps * eps * eps)));
    }

    // One failure share per randomized step implied by the caps.
    double confidence() const {
        double b = 2.0 * static_cast<double>(max_stages()) * std::ldexp(1.0, k_max) +
                   std::ldexp(1.0, k_max);
        return 1.0 / (30.0 * b);
    }

    void validate() const {
        if (eps <= 0.0 || eps >= 1.0 || tau <= 0.0 || tau >= 1.0)
            throw std::invalid_argument("RegularityBudget: eps, tau in (0,1)");
        if (k_max == 0 || k_max > 24) throw std::invalid_argument("RegularityBudget: k_max in [1,24]");
        if (route_reps % 2 == 0) throw std::invalid_argument("RegularityBudget: route_reps must be odd");
    }
};

struct LeafInfo {
    bool keep = false;
    double density_estimate = 0.0;
    bool zeroed_unresolved = false;  // had a surviving frequency at the stop stage
};

// One implicit level: a decoder anchored at the coset it split. The level
// function on an ambient x with earlier-level address a is
//   l(x) = maj_r [ D(z0 + (x + r_a) + y_r) + D(z0 + y_r) ]
// where r_a is the seed transversal point of address a. Seeds are chosen so
// that seed_i has address e_i, which makes the transversal linear and the
// level function a genuine parity extension.
struct ImplicitLevel {
    Decoder decoder;
    Point z0;
    uint8_t c0 = 0;            // D(z0), the direct-route complement
    std::vector<Point> ys;     // correction offsets within the stage subspace
    std::vector<uint8_t> cy;   // cached D(z0 + y_r)
};

enum class RouteMode { Exact, Direct, Corrected };

// Nonadaptive parity decision tree: one label per level, 2^depth leaves
// addressed by the level-order bit string (level 1 = lowest bit).
class ParityDecisionTree {
  public:
    explicit ParityDecisionTree(uint32_t n, bool implicit = false)
        : n_(n), implicit_(implicit), leaves_(1) {}

    uint32_t dim() const { return n_; }
    bool implicit() const { return implicit_; }
    uint32_t depth() const {
        return static_cast<uint32_t>(implicit_ ? levels_.size() : labels_.size());
    }
    uint64_t leaf_count() const { return uint64_t{1} << depth(); }

    const std::vector<Point>& labels() const { return labels_; }
    const std::vector<ImplicitLevel>& levels() const { return levels_; }
    const std::vector<Point>& seeds() const { return seeds_; }

    std::vector<LeafInfo>& leaves() { return leaves_; }
    const std::vector<LeafInfo>& leaves() const { return leaves_; }

    void add_explicit_level(const Point& alpha) {
        if (implicit_) throw std::logic_error("tree is implicit");
        GF2Matrix m(labels_.empty() ? std::vector<Point>{alpha} : labels_);
        if (!labels_.empty()) m.add_row(alpha);
        if (m.rank() != labels_.size() + 1)
            throw std::invalid_argument("add_explicit_level: labels must stay independent");
        labels_.push_back(alpha);
        leaves_.assign(leaf_count(), LeafInfo{});
    }

    void add_implicit_level(ImplicitLevel lvl, const Point& seed) {
        if (!implicit_) throw std::logic_error("tree is explicit");
        levels_.push_back(std::move(lvl));
        seeds_.push_back(seed);
        leaves_.assign(leaf_count(), LeafInfo{});
    }

    // Level function of level j (0-based) on x, given the address bits of
    // the earlier levels.
    int level_value(size_t j, const Point& x, uint64_t prefix, RouteMode mode) const {
        if (!implicit_) return x.dot(labels_[j]);
        const ImplicitLevel& lvl = levels_[j];
        Point u = x;
        for (size_t i = 0; i < j; ++i)
            if ((prefix >> i) & 1) u ^= seeds_[i];
        if (mode == RouteMode::Direct || lvl.ys.empty())
            return lvl.decoder.eval(lvl.z0 ^ u) ^ lvl.c0;
        uint32_t ones = 0;
        for (size_t r = 0; r < lvl.ys.size(); ++r)
            ones += static_cast<uint32_t>(lvl.decoder.eval(lvl.z0 ^ u ^ lvl.ys[r]) ^ lvl.cy[r]);
        return ones > lvl.ys.size() / 2 ? 1 : 0;
    }

    uint64_t route(const Point& x, RouteMode mode = RouteMode::Exact) const {
        if (implicit_ && mode == RouteMode::Exact) mode = RouteMode::Corrected;
        uint64_t addr = 0;
        for (size_t j = 0; j < depth(); ++j)
            addr |= static_cast<uint64_t>(level_value(j, x, addr, mode)) << j;
        return addr;
    }

  private:
    uint32_t n_;
    bool implicit_;
    std::vector<Point> labels_;          // explicit mode
    std::vector<ImplicitLevel> levels_;  // implicit mode
    std::vector<Point> seeds_;           // implicit mode transversal
    std::vector<LeafInfo> leaves_;
};

// The A' oracle: tree verdict at x times A(x). Explicit routing costs one
// base query per call; implicit routing adds the level machinery's cost.
class RestrictedOracle final : public SetOracle {
  public:
    RestrictedOracle(std::shared_ptr<const ParityDecisionTree> tree,
                     std::shared_ptr<const SetOracle> a, RouteMode mode)
        : SetOracle(a->dim()), tree_(std::move(tree)), a_(std::move(a)), mode_(mode) {}

    const ParityDecisionTree& tree() const { return *tree_; }

  protected:
    int eval(const Point& x) const override {
        uint64_t addr = tree_->route(x, mode_);
        int verdict = tree_->leaves()[addr].keep ? 1 : 0;
        return verdict * a_->query(x);
    }

  private:
    std::shared_ptr<const ParityDecisionTree> tree_;
    std::shared_ptr<const SetOracle> a_;
    RouteMode mode_;
};

}  // namespace f2s
