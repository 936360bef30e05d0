#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "f2s/sumset.hpp"

using namespace f2s;

namespace {

std::shared_ptr<StoredSet> tail_union_stored(uint32_t n, uint32_t k,
                                             const std::set<uint64_t>& addrs) {
    auto s = std::make_shared<StoredSet>(n);
    for (uint64_t x = 0; x < s->size(); ++x)
        s->set(x, addrs.count(x & ((uint64_t{1} << k) - 1)) > 0);
    return s;
}

RegularityBudget desk_budget(double eps, double tau) {
    RegularityBudget b;
    b.eps = eps;
    b.tau = tau;
    b.k_max = 6;
    b.i_max = 8;
    return b;
}

// tree with given keep pattern over explicit unit labels, for closure tests
std::shared_ptr<ParityDecisionTree> pattern_tree(uint32_t n, uint32_t k, uint64_t keep_mask) {
    auto t = std::make_shared<ParityDecisionTree>(n);
    for (uint32_t i = 1; i <= k; ++i) t->add_explicit_level(Point::unit(n, i));
    for (uint64_t c = 0; c < t->leaf_count(); ++c) t->leaves()[c].keep = (keep_mask >> c) & 1;
    return t;
}

}  // namespace

TEST_CASE("sum tree closure is the exact pairwise-xor set of keep leaves") {
    RandomSource rng(61);
    for (int trial = 0; trial < 30; ++trial) {
        uint32_t k = 1 + static_cast<uint32_t>(rng.below(6));
        uint64_t mask = rng.below(uint64_t{1} << (uint64_t{1} << k));
        auto tree = pattern_tree(10, k, mask);
        SumTree st = SumTree::closure(tree);
        for (uint64_t c = 0; c < (uint64_t{1} << k); ++c) {
            bool expect = false;
            for (uint64_t a = 0; a < (uint64_t{1} << k) && !expect; ++a)
                for (uint64_t b = 0; b < (uint64_t{1} << k); ++b)
                    if (((mask >> a) & 1) && ((mask >> b) & 1) && (a ^ b) == c) {
                        expect = true;
                        break;
                    }
            CHECK(st.verdict_at(c) == (expect ? 1 : 0));
        }
    }
}

TEST_CASE("enlarging the keep set never shrinks the sum tree") {
    RandomSource rng(62);
    for (int trial = 0; trial < 20; ++trial) {
        uint32_t k = 2 + static_cast<uint32_t>(rng.below(5));
        uint64_t cells = uint64_t{1} << k;
        uint64_t mask = rng.below(uint64_t{1} << cells);
        uint64_t bigger = mask | rng.below(uint64_t{1} << cells);
        SumTree small = SumTree::closure(pattern_tree(10, k, mask));
        SumTree large = SumTree::closure(pattern_tree(10, k, bigger));
        for (uint64_t c = 0; c < cells; ++c)
            if (small.verdict_at(c)) CHECK(large.verdict_at(c));
    }
}

TEST_CASE("explicit pipeline on a three-coset union: sumset verdicts are exact") {
    const uint32_t n = 16;
    const std::set<uint64_t> addrs = {0b001, 0b010, 0b100};
    auto stored = tail_union_stored(n, 3, addrs);
    auto a = std::make_shared<StoredOracle>(stored);
    RandomSource rng(63);
    auto sim = simulate_sumset(a, desk_budget(0.1, 0.1), PipelineMode::Explicit, rng);

    // ground truth: the sumset of the full union, which equals A' + A'
    StoredSet truth = brute_sumset(*stored);
    uint64_t base_queries = a->query_count();
    uint64_t mismatches = 0;
    for (uint64_t x = 0; x < stored->size(); ++x) {
        Point p = Point::from_index(n, x);
        if (sim.sumset->query(p) != (truth.member(x) ? 1 : 0)) ++mismatches;
    }
    CHECK(mismatches == 0);
    // the explicit sumset oracle makes zero base queries per call
    CHECK(a->query_count() == base_queries);

    auto rep = audit(*stored, 0.1, 0.1, sim);
    CHECK(rep.all_pass);
    CHECK(rep.dist_sumset == 0.0);
    CHECK(rep.dist_a_prime == 0.0);
    CHECK(rep.vol_removed == 0.0);
    CHECK(rep.eps_hat <= 1e-9);
    CHECK(rep.min_kept_density == doctest::Approx(1.0));
}

TEST_CASE("empty set gives the identically-zero sumset oracle") {
    const uint32_t n = 14;
    auto a = std::make_shared<FunctionOracle>(n, [](const Point&) { return 0; });
    RandomSource rng(64);
    auto sim = simulate_sumset(a, desk_budget(0.1, 0.1), PipelineMode::Explicit, rng);
    RandomSource tr(65);
    for (int i = 0; i < 100; ++i) CHECK(sim.sumset->query(tr.point(n)) == 0);
}

TEST_CASE("sumset oracle is constant on routed cosets") {
    const uint32_t n = 12;
    const std::set<uint64_t> addrs = {0b01, 0b11};
    auto stored = tail_union_stored(n, 2, addrs);
    auto a = std::make_shared<StoredOracle>(stored);
    RandomSource rng(66);
    auto sim = simulate_sumset(a, desk_budget(0.1, 0.1), PipelineMode::Explicit, rng);
    const auto& tree = *sim.regularity.tree;
    std::vector<int> per_class(tree.leaf_count(), -1);
    for (uint64_t x = 0; x < stored->size(); ++x) {
        Point p = Point::from_index(n, x);
        uint64_t c = tree.route(p);
        int v = sim.sumset->query(p);
        if (per_class[c] < 0) per_class[c] = v;
        CHECK(per_class[c] == v);
    }
}

TEST_CASE("volume estimation: constants and hyperplanes") {
    const uint32_t n = 16;
    auto ones = std::make_shared<FunctionOracle>(n, [](const Point&) { return 1; });
    RandomSource rng(67);
    auto est = estimate_volume(*ones, 0.05, 0.05, rng);
    CHECK(est.value == 1.0);
    CHECK(est.samples >= static_cast<uint64_t>(std::ceil(2.0 * std::log(40.0) / 0.0025)));

    Point alpha = Point::from_index(n, 0b1001101001101001);
    auto hp = std::make_shared<FunctionOracle>(
        n, [alpha](const Point& x) { return x.dot(alpha) == 0 ? 1 : 0; });
    int hits = 0;
    for (int trial = 0; trial < 50; ++trial) {
        RandomSource r = rng.split(trial);
        auto e = estimate_volume(*hp, 0.05, 0.05, r);
        hits += std::abs(e.value - 0.5) <= 0.05 ? 1 : 0;
    }
    CHECK(hits >= 48);
    CHECK_THROWS(estimate_volume(*ones, 0.0, 0.05, rng));
}

TEST_CASE("volume of the sumset oracle matches the sum-tree leaf count") {
    const uint32_t n = 16;
    const std::set<uint64_t> addrs = {0b001, 0b010, 0b100};
    auto stored = tail_union_stored(n, 3, addrs);
    auto a = std::make_shared<StoredOracle>(stored);
    RandomSource rng(68);
    auto sim = simulate_sumset(a, desk_budget(0.1, 0.1), PipelineMode::Explicit, rng);
    const SumTree& st = sim.sumset->sum_tree();
    double exact = 0.0;
    for (uint64_t c = 0; c < st.verdicts.size(); ++c) exact += st.verdict_at(c);
    exact /= static_cast<double>(st.verdicts.size());
    RandomSource vr(69);
    auto est = estimate_volume(*sim.sumset, 0.05, 0.01, vr);
    CHECK(std::abs(est.value - exact) <= 0.05);
}

TEST_CASE("noisy dense coset keeps the chebyshev bound") {
    // random half-density subset of one codim-2 coset: the kept coset is
    // quasirandom at the sampling scale and the sumset covers its target
    // coset within 16 eps_hat^2 / tau^4
    const uint32_t n = 14;
    RandomSource gen(70);
    auto stored = std::make_shared<StoredSet>(n);
    for (uint64_t x = 0; x < stored->size(); ++x)
        if ((x & 3) == 0b01 && gen.bernoulli(0.5)) stored->set(x, true);
    auto a = std::make_shared<StoredOracle>(stored);
    RegularityBudget b = desk_budget(0.1, 0.3);
    RandomSource rng(71);
    auto sim = simulate_sumset(a, b, PipelineMode::Explicit, rng);
    auto rep = audit(*stored, 0.1, 0.3, sim);
    CHECK(rep.kept_cosets == 1);
    CHECK(rep.min_kept_density >= 0.3);
    CHECK(rep.eps_hat <= 0.1);
    CHECK(rep.dist_sumset <= 16.0 * rep.eps_hat * rep.eps_hat / (0.3 * 0.3 * 0.3 * 0.3));
    for (auto& c : rep.clauses) CHECK(c.pass);
}

TEST_CASE("audit tolerates a coset with density in the legal band") {
    // one coset with density exactly tau: keep and zero are both legal
    const uint32_t n = 12;
    const double tau = 0.25;
    RandomSource gen(72);
    auto stored = std::make_shared<StoredSet>(n);
    uint64_t per_coset = stored->size() / 4;
    uint64_t want = static_cast<uint64_t>(tau * static_cast<double>(per_coset));
    uint64_t placed = 0;
    for (uint64_t x = 0; x < stored->size() && placed < want; ++x)
        if ((x & 3) == 0b10) {
            stored->set(x, true);
            ++placed;
        }
    auto a = std::make_shared<StoredOracle>(stored);
    RandomSource rng(73);
    auto sim = simulate_sumset(a, desk_budget(0.2, tau), PipelineMode::Explicit, rng);
    auto rep = audit(*stored, 0.2, tau, sim);
    for (auto& c : rep.clauses)
        if (c.name == "zeroed_leaves_legal" || c.name == "kept_density_ge_half_tau")
            CHECK(c.pass);
}

TEST_CASE("implicit pipeline sumset verdicts match the explicit truth") {
    const uint32_t n = 14;
    const std::set<uint64_t> addrs = {0b00, 0b01, 0b10};
    auto stored = tail_union_stored(n, 2, addrs);
    auto a = std::make_shared<StoredOracle>(stored);
    RandomSource rng(74);
    auto sim = simulate_sumset(a, desk_budget(0.1, 0.1), PipelineMode::Implicit, rng);
    auto rep = audit(*stored, 0.1, 0.1, sim);
    CHECK(rep.all_pass);
    CHECK(rep.dist_sumset == 0.0);
    CHECK(rep.dist_a_prime == 0.0);
    CHECK(rep.kept_cosets == 3);
    // spot-check the live oracle against the brute-force sumset
    StoredSet truth = brute_sumset(*stored);
    RandomSource tr(75);
    int mismatches = 0;
    for (int i = 0; i < 200; ++i) {
        Point x = tr.point(n);
        mismatches += sim.sumset->query(x) != (truth.member(x.index()) ? 1 : 0);
    }
    CHECK(mismatches == 0);
}
