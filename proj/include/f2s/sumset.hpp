#pragma once

#include <memory>
#include <string>

#include "f2s/regularity.hpp"

namespace f2s {

// Leaf-sum closure over the regularity tree: address c is marked iff two
// keep-leaves sum to it. Shares the tree's levels; needs no set access.
struct SumTree {
    std::shared_ptr<const ParityDecisionTree> tree;
    std::vector<uint8_t> verdicts;

    static SumTree closure(std::shared_ptr<const ParityDecisionTree> t) {
        SumTree s;
        s.verdicts.assign(t->leaf_count(), 0);
        const auto& leaves = t->leaves();
        std::vector<uint64_t> keep;
        for (uint64_t i = 0; i < leaves.size(); ++i)
            if (leaves[i].keep) keep.push_back(i);
        for (uint64_t a : keep)
            for (uint64_t b : keep) s.verdicts[a ^ b] = 1;
        s.tree = std::move(t);
        return s;
    }

    int verdict_at(uint64_t addr) const { return verdicts[addr]; }
};

// O_{A'+A'}: the sum-tree verdict at the routed address. With an explicit
// tree this makes zero base queries; implicit routing pays the level costs.
class SumsetOracle final : public SetOracle {
  public:
    SumsetOracle(SumTree sum, RouteMode mode)
        : SetOracle(sum.tree->dim()), sum_(std::move(sum)), mode_(mode) {}

    const SumTree& sum_tree() const { return sum_; }

  protected:
    int eval(const Point& x) const override {
        return sum_.verdict_at(sum_.tree->route(x, mode_));
    }

  private:
    SumTree sum_;
    RouteMode mode_;
};

enum class PipelineMode { Explicit, Implicit };

struct SimulateResult {
    RegularityResult regularity;
    std::shared_ptr<RestrictedOracle> a_prime;
    std::shared_ptr<SumsetOracle> sumset;
    PipelineMode mode = PipelineMode::Explicit;
};

// Runs the decomposition and wires up both oracles.
SimulateResult simulate_sumset(std::shared_ptr<const SetOracle> a, const RegularityBudget& budget,
                               PipelineMode mode, RandomSource& rng);

struct VolumeEstimate {
    double value = 0.0;
    double precision = 0.0;
    double confidence = 0.0;
    uint64_t samples = 0;
};

// Uniform-sampling volume to within +-gamma at confidence 1-delta.
VolumeEstimate estimate_volume(const SetOracle& o, double gamma, double delta,
                               RandomSource& rng);

struct AuditClause {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double bound = 0.0;
};

// Exhaustive comparison of a pipeline run against stored-set ground truth.
struct AuditReport {
    bool all_pass = false;
    std::vector<AuditClause> clauses;
    double vol_a = 0.0;
    double vol_a_prime = 0.0;
    double vol_removed = 0.0;
    double eps_hat = 0.0;           // max nontrivial coefficient over kept cosets
    double min_kept_density = 1.0;  // exact, over kept cosets
    double dist_sumset = 0.0;       // dist(sum verdicts, A' + A')
    double dist_a_prime = 0.0;      // dist(routed A' verdicts, reference A')
    uint32_t depth = 0;
    uint64_t kept_cosets = 0;
};

AuditReport audit(const StoredSet& a, double eps, double tau, const SimulateResult& sim,
                  double chebyshev_constant = 16.0);

}  // namespace f2s
