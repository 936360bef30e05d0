#pragma once

#include <functional>
#include <memory>

#include "f2s/fourier.hpp"
#include "f2s/gl.hpp"
#include "f2s/pdt.hpp"

namespace f2s {

// Per-coset record of one stage; freq_hex is the lifted ambient frequency in
// explicit mode, empty for implicit levels.
struct CosetStageRecord {
    uint64_t address = 0;
    bool survivor = false;
    std::string freq_hex;
    double estimate = 0.0;
};

struct StageRecord {
    uint32_t stage = 0;
    uint32_t depth_before = 0;
    uint32_t depth_after = 0;
    bool stopped = false;
    std::vector<CosetStageRecord> cosets;
    uint64_t queries_after = 0;
};

struct RegularityResult {
    std::shared_ptr<ParityDecisionTree> tree;
    std::vector<StageRecord> transcript;
    uint64_t construction_queries = 0;

    std::shared_ptr<RestrictedOracle> restricted_oracle(std::shared_ptr<const SetOracle> a,
                                                        RouteMode mode) const {
        return std::make_shared<RestrictedOracle>(tree, std::move(a), mode);
    }
};

// Alg-1-style explicit construction: per stage, one first-discovery heavy
// frequency per coset found by bucket descent on the coset view at threshold
// eps, splits on independent lifts, then leaf densities at threshold tau.
RegularityResult construct_dt(std::shared_ptr<const SetOracle> a, const RegularityBudget& budget,
                              RandomSource& rng);

// Query-efficient twin: stage list decoding on coset views via the shared
// voting-table machinery, routed-pool coset sampling, sampled independence
// checks, anchored implicit levels.
RegularityResult construct_implicit_dt(std::shared_ptr<const SetOracle> a,
                                       const RegularityBudget& budget, RandomSource& rng);

// Mean squared coset density of A under the partition by the given parity
// labels; the potential that forces termination.
double expimb(const StoredSet& a, const std::vector<Point>& labels);

// Exact GF(2) independence of explicit labels.
bool independence_check(const std::vector<Point>& existing, const Point& candidate);

// Sampled variant: evaluates the given parity functions on N shared uniform
// points and accepts iff the k x N evaluation matrix has full row rank.
// False accepts of dependent exact parities are impossible; false rejects of
// independent ones occur with probability at most 2^(k^2 - N).
bool independence_check_sampled(uint32_t n,
                                const std::vector<std::function<int(const Point&)>>& parities,
                                uint32_t num_points, RandomSource& rng);

// Exhaustive routing of every point of the cube (n <= 24); reference table
// for audits of either mode.
std::vector<uint32_t> route_table(const ParityDecisionTree& tree, RouteMode mode);

double expimb_from_addresses(const StoredSet& a, const std::vector<uint32_t>& addr,
                             uint32_t depth);

}  // namespace f2s
