#include "f2s/sumset.hpp"

#include <algorithm>
#include <cmath>

namespace f2s {

SimulateResult simulate_sumset(std::shared_ptr<const SetOracle> a, const RegularityBudget& budget,
                               PipelineMode mode, RandomSource& rng) {
    SimulateResult out;
    out.mode = mode;
    RandomSource crng = rng.split("construct");
    out.regularity = mode == PipelineMode::Explicit ? construct_dt(a, budget, crng)
                                                    : construct_implicit_dt(a, budget, crng);
    RouteMode route = mode == PipelineMode::Explicit ? RouteMode::Exact : RouteMode::Corrected;
    out.a_prime = out.regularity.restricted_oracle(a, route);
    out.sumset = std::make_shared<SumsetOracle>(SumTree::closure(out.regularity.tree), route);
    return out;
}

VolumeEstimate estimate_volume(const SetOracle& o, double gamma, double delta,
                               RandomSource& rng) {
    if (gamma <= 0.0 || gamma >= 1.0 || delta <= 0.0 || delta >= 1.0)
        throw std::invalid_argument("estimate_volume: gamma, delta in (0,1)");
    uint64_t m = static_cast<uint64_t>(std::ceil(2.0 * std::log(2.0 / delta) / (gamma * gamma)));
    uint64_t ones = 0;
    for (uint64_t i = 0; i < m; ++i) ones += static_cast<uint64_t>(o.query(rng.point(o.dim())));
    return {static_cast<double>(ones) / static_cast<double>(m), gamma, delta, m};
}

AuditReport audit(const StoredSet& a, double eps, double tau, const SimulateResult& sim,
                  double chebyshev_constant) {
    const uint32_t n = a.dim();
    const ParityDecisionTree& tree = *sim.regularity.tree;
    if (tree.dim() != n) throw std::invalid_argument("audit: dimension mismatch");

    AuditReport rep;
    rep.depth = tree.depth();
    const uint64_t sz = a.size();
    const uint64_t m = tree.leaf_count();
    const uint32_t k = tree.depth();

    // One exhaustive routing pass; deterministic in both modes.
    RouteMode route = sim.mode == PipelineMode::Explicit ? RouteMode::Exact : RouteMode::Direct;
    std::vector<uint32_t> addr = route_table(tree, route);

    // Effective labels of the routing: for explicit trees these are the tree
    // labels; for implicit trees they are reconstructed from the routed
    // addresses of the unit vectors. Any deviation of the real routing from
    // this affine model flows into the distance clauses below.
    std::vector<Point> labels;
    uint32_t addr0 = addr[0];
    if (!tree.implicit()) {
        labels = tree.labels();
    } else {
        for (uint32_t j = 0; j < k; ++j) {
            Point beta(n);
            for (uint32_t i = 1; i <= n; ++i) {
                uint32_t di = addr[Point::unit(n, i).index()] ^ addr0;
                beta.set_bit(n - i, (di >> j) & 1);
            }
            labels.push_back(beta);
        }
    }
    bool labels_independent =
        labels.empty() || GF2Matrix(labels).rank() == labels.size();

    // Model partition: affine extension of the unit-vector addresses.
    std::vector<uint32_t> model(sz, 0);
    if (labels_independent) {
        for (uint64_t x = 0; x < sz; ++x) {
            Point p = Point::from_index(n, x);
            uint32_t c = 0;
            for (uint32_t j = 0; j < k; ++j)
                c |= static_cast<uint32_t>(p.dot(labels[j])) << j;
            model[x] = c ^ (tree.implicit() ? addr0 : 0);
        }
    } else {
        model = addr;
    }

    // Reference A' from the real routing and the leaf verdicts.
    StoredSet a_prime(n);
    uint64_t card_a = 0, card_ap = 0;
    for (uint64_t x = 0; x < sz; ++x) {
        bool in_a = a.member(x);
        card_a += in_a;
        if (in_a && tree.leaves()[addr[x]].keep) {
            a_prime.set(x, true);
            ++card_ap;
        }
    }
    rep.vol_a = static_cast<double>(card_a) / static_cast<double>(sz);
    rep.vol_a_prime = static_cast<double>(card_ap) / static_cast<double>(sz);
    rep.vol_removed = rep.vol_a - rep.vol_a_prime;

    // Per-coset densities and quasirandomness of kept cosets over the model
    // partition.
    std::vector<uint64_t> total(m, 0), members(m, 0);
    for (uint64_t x = 0; x < sz; ++x) {
        total[model[x]]++;
        if (a.member(x)) members[model[x]]++;
    }
    bool density_ok = true, leaf_band_ok = true;
    rep.eps_hat = 0.0;
    {
        // group the cube by model address once, then transform each class
        std::vector<std::vector<uint64_t>> order(m);
        for (uint64_t c = 0; c < m; ++c) order[c].reserve(sz / m);
        for (uint64_t x = 0; x < sz; ++x) order[model[x]].push_back(x);
        for (uint64_t c = 0; c < m; ++c) {
            const LeafInfo& leaf = tree.leaves()[c];
            double density =
                total[c] ? static_cast<double>(members[c]) / static_cast<double>(total[c]) : 0.0;
            if (!leaf.keep) {
                if (density > tau && !leaf.zeroed_unresolved) leaf_band_ok = false;
                continue;
            }
            ++rep.kept_cosets;
            rep.min_kept_density = std::min(rep.min_kept_density, density);
            if (density < tau / 2.0) density_ok = false;
            if (!labels_independent || order[c].size() != sz / m) continue;
            // the class is an affine subspace; XOR with its base point maps
            // it onto a subspace whose sorted enumeration is a group order
            uint64_t base = order[c][0];
            std::vector<double> g(order[c].size());
            // membership indexed by the rank of (x ^ base) in the subspace:
            // sorted XOR offsets of an F2-subspace enumerate it linearly
            std::vector<uint64_t> offs(order[c].size());
            for (size_t i = 0; i < order[c].size(); ++i) offs[i] = order[c][i] ^ base;
            std::sort(offs.begin(), offs.end());
            for (size_t i = 0; i < offs.size(); ++i)
                g[i] = a.member(offs[i] ^ base) ? 1.0 : 0.0;
            SpectrumTable s = wht(g);
            rep.eps_hat = std::max(rep.eps_hat, s.max_nontrivial().first);
        }
    }

    // dist(O_{A'}, A') and the subset property, on the real routing.
    bool subset_ok = true;
    uint64_t mismatch_ap = 0;
    for (uint64_t x = 0; x < sz; ++x) {
        int via_tree = (tree.leaves()[addr[x]].keep && a.member(x)) ? 1 : 0;
        if (via_tree && !a.member(x)) subset_ok = false;
        if (via_tree != (a_prime.member(x) ? 1 : 0)) ++mismatch_ap;
    }
    rep.dist_a_prime = static_cast<double>(mismatch_ap) / static_cast<double>(sz);

    // Sumset verdicts against the exact sumset of the reference A'.
    StoredSet truth = brute_sumset(a_prime);
    const SumTree& st = sim.sumset->sum_tree();
    uint64_t mismatch_sum = 0;
    for (uint64_t x = 0; x < sz; ++x)
        if (st.verdict_at(addr[x]) != (truth.member(x) ? 1 : 0)) ++mismatch_sum;
    rep.dist_sumset = static_cast<double>(mismatch_sum) / static_cast<double>(sz);

    double sum_bound = chebyshev_constant * rep.eps_hat * rep.eps_hat / (tau * tau * tau * tau);
    rep.clauses = {
        {"a_prime_subset_of_a", subset_ok, rep.dist_a_prime, 0.0},
        {"vol_removed_le_eps_plus_tau", rep.vol_removed <= eps + tau + 1e-12, rep.vol_removed,
         eps + tau},
        {"kept_density_ge_half_tau", density_ok, rep.min_kept_density, tau / 2.0},
        {"kept_quasirandom_le_eps", rep.eps_hat <= eps + 1e-12, rep.eps_hat, eps},
        {"zeroed_leaves_legal", leaf_band_ok, 0.0, tau},
        {"sumset_dist_le_bound", rep.dist_sumset <= std::max(sum_bound, 0.0) + 1e-12,
         rep.dist_sumset, sum_bound},
        {"routing_labels_independent", labels_independent, 0.0, 0.0},
    };
    rep.all_pass = std::all_of(rep.clauses.begin(), rep.clauses.end(),
                               [](const AuditClause& c) { return c.pass; });
    return rep;
}

}  // namespace f2s
