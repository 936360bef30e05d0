#include "f2s/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace f2s {

namespace {

// Sequential density/coefficient gate shared by the leaf phase; mirrors the
// gates inside the list decoders.
struct DensityGate {
    double lo, hi, mid;
    double lnterm;
    size_t m_max;
    static constexpr int kMaxCheckpoints = 24;

    DensityGate(double lo_, double hi_, double kappa)
        : lo(lo_), hi(hi_), mid(0.5 * (lo_ + hi_)) {
        lnterm = std::log(4.0 * kMaxCheckpoints / kappa);
        double halfgap = 0.5 * (hi - lo);
        m_max = static_cast<size_t>(std::ceil(lnterm / (2.0 * halfgap * halfgap)));
    }

    // Runs to a verdict; sampler() returns one 0/1 observation.
    std::pair<bool, double> run(const std::function<int()>& sampler) const {
        size_t ones = 0, m = 0, cp = std::min<size_t>(64, m_max);
        for (;;) {
            ones += static_cast<size_t>(sampler());
            ++m;
            if (m < cp) continue;
            double est = static_cast<double>(ones) / static_cast<double>(m);
            if (m >= m_max) return {est >= mid, est};
            double r = std::sqrt(lnterm / (2.0 * static_cast<double>(m)));
            if (est - r > lo) return {true, est};
            if (est + r < hi) return {false, est};
            cp = std::min(cp * 2, m_max);
        }
    }
};

// Certifies that a 0/1 function has no nontrivial coefficient of magnitude
// theta/2: every such coefficient squares below the total nontrivial weight
// mu(1-mu), so a density certified outside [c, 1-c] with c(1-c) = theta^2/4
// rules them all out. Binomial KL tails make the near-constant case cheap.
bool screen_no_heavy(const std::function<int()>& sampler, double theta, double kappa) {
    const double c = 0.5 * (1.0 - std::sqrt(std::max(0.0, 1.0 - theta * theta)));
    const double lnterm = std::log(4.0 * 24 / kappa);
    auto kl = [](double p, double q) {
        double acc = 0.0;
        if (p > 0.0) acc += p * std::log(p / q);
        if (p < 1.0) acc += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
        return acc;
    };
    size_t ones = 0, m = 0, cp = 64;
    const size_t m_cap = 60000;
    for (;;) {
        ones += static_cast<size_t>(sampler());
        ++m;
        if (m < cp) continue;
        double mu = static_cast<double>(ones) / static_cast<double>(m);
        if (mu < c && static_cast<double>(m) * kl(mu, c) >= lnterm) return true;
        if (mu > 1.0 - c && static_cast<double>(m) * kl(mu, 1.0 - c) >= lnterm) return true;
        // certified inside (c, 1-c): the screen cannot decide
        if (mu > c && static_cast<double>(m) * kl(mu, c) >= lnterm && mu < 1.0 - c &&
            static_cast<double>(m) * kl(mu, 1.0 - c) >= lnterm)
            return false;
        if (m >= m_cap) return false;
        cp = std::min(cp * 2, m_cap);
    }
}

std::vector<int> address_bits(uint64_t addr, uint32_t k) {
    std::vector<int> b(k);
    for (uint32_t j = 0; j < k; ++j) b[j] = static_cast<int>((addr >> j) & 1);
    return b;
}

}  // namespace

double expimb(const StoredSet& a, const std::vector<Point>& labels) {
    uint32_t n = a.dim();
    uint32_t k = static_cast<uint32_t>(labels.size());
    uint64_t m = uint64_t{1} << k;
    std::vector<uint64_t> cnt(m, 0);
    for (uint64_t x = 0; x < a.size(); ++x) {
        if (!a.member(x)) continue;
        Point p = Point::from_index(n, x);
        uint64_t addr = 0;
        for (uint32_t j = 0; j < k; ++j)
            addr |= static_cast<uint64_t>(p.dot(labels[j])) << j;
        cnt[addr]++;
    }
    double coset_size = std::ldexp(1.0, static_cast<int>(n - k));
    double acc = 0.0;
    for (uint64_t i = 0; i < m; ++i) {
        double d = static_cast<double>(cnt[i]) / coset_size;
        acc += d * d;
    }
    return acc / static_cast<double>(m);
}

bool independence_check(const std::vector<Point>& existing, const Point& candidate) {
    GF2Matrix m(existing.empty() ? std::vector<Point>{candidate} : existing);
    if (!existing.empty()) m.add_row(candidate);
    return m.rank() == existing.size() + 1;
}

bool independence_check_sampled(uint32_t n,
                                const std::vector<std::function<int(const Point&)>>& parities,
                                uint32_t num_points, RandomSource& rng) {
    if (parities.empty()) return true;
    std::vector<Point> rows(parities.size(), Point(num_points));
    for (uint32_t j = 0; j < num_points; ++j) {
        Point x = rng.point(n);
        for (size_t i = 0; i < parities.size(); ++i) rows[i].set_bit(j, parities[i](x));
    }
    return GF2Matrix(rows).rank() == parities.size();
}

std::vector<uint32_t> route_table(const ParityDecisionTree& tree, RouteMode mode) {
    uint32_t n = tree.dim();
    if (n > StoredSet::kMaxDim) throw std::invalid_argument("route_table: n too large");
    std::vector<uint32_t> out(uint64_t{1} << n);
    for (uint64_t x = 0; x < out.size(); ++x)
        out[x] = static_cast<uint32_t>(tree.route(Point::from_index(n, x), mode));
    return out;
}

double expimb_from_addresses(const StoredSet& a, const std::vector<uint32_t>& addr,
                             uint32_t depth) {
    uint64_t m = uint64_t{1} << depth;
    std::vector<uint64_t> total(m, 0), members(m, 0);
    for (uint64_t x = 0; x < addr.size(); ++x) {
        total[addr[x]]++;
        if (a.member(x)) members[addr[x]]++;
    }
    double acc = 0.0;
    for (uint64_t i = 0; i < m; ++i) {
        if (total[i] == 0) continue;
        double d = static_cast<double>(members[i]) / static_cast<double>(total[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(m);
}

// ---- explicit construction -------------------------------------------------

RegularityResult construct_dt(std::shared_ptr<const SetOracle> a, const RegularityBudget& budget,
                              RandomSource& rng) {
    budget.validate();
    const uint32_t n = a->dim();
    const double eps = budget.eps, tau = budget.tau, gamma = budget.stop_fraction();
    const double conf = budget.confidence();

    RegularityResult out;
    out.tree = std::make_shared<ParityDecisionTree>(n, false);
    auto& tree = *out.tree;
    const uint64_t base_queries = a->query_count();

    std::vector<CosetStageRecord> stop_cosets;
    for (uint32_t stage = 0;; ++stage) {
        if (stage >= budget.max_stages())
            throw BudgetExhausted("construct_dt: stage cap reached before the stop rule");
        uint32_t k = tree.depth();
        uint64_t m = uint64_t{1} << k;
        StageRecord rec;
        rec.stage = stage;
        rec.depth_before = k;

        struct Found {
            uint64_t addr;
            Point ambient;
            double estimate;
        };
        std::vector<Found> found;
        for (uint64_t addr = 0; addr < m; ++addr) {
            RandomSource crng = rng.split("stage").split(stage).split("gl").split(addr);
            std::vector<ExplicitCoefficient> res;
            std::shared_ptr<CosetSpec> spec;
            if (k > 0) spec = std::make_shared<CosetSpec>(tree.labels(), address_bits(addr, k));
            RandomSource srng = rng.split("stage").split(stage).split("screen").split(addr);
            auto screen_sampler = [&]() {
                return a->query(k == 0 ? srng.point(n) : spec->sample(srng));
            };
            bool screened = screen_no_heavy(screen_sampler, eps, conf);
            if (!screened) {
                if (k == 0)
                    res = explicit_gl_core(full_coord_domain(a), eps, conf, crng, true, true);
                else
                    res = explicit_gl_core(coset_coord_domain(a, spec), eps, conf, crng, true, true);
            }
            CosetStageRecord cr;
            cr.address = addr;
            if (!res.empty()) {
                Point ambient = k == 0 ? res[0].freq : spec->lift_frequency(res[0].freq);
                cr.survivor = true;
                cr.freq_hex = ambient.to_hex();
                cr.estimate = res[0].estimate;
                found.push_back({addr, ambient, res[0].estimate});
            }
            rec.cosets.push_back(cr);
        }

        bool stop = static_cast<double>(found.size()) <= gamma * static_cast<double>(m) + 1e-9;
        if (stop) {
            rec.depth_after = k;
            rec.stopped = true;
            rec.queries_after = a->query_count() - base_queries;
            stop_cosets = rec.cosets;
            out.transcript.push_back(rec);
            break;
        }
        for (auto& f : found) {
            if (!independence_check(tree.labels(), f.ambient)) continue;
            if (tree.depth() >= budget.k_max)
                throw BudgetExhausted("construct_dt: codimension cap reached");
            tree.add_explicit_level(f.ambient);
        }
        rec.depth_after = tree.depth();
        rec.queries_after = a->query_count() - base_queries;
        out.transcript.push_back(rec);
    }

    // Leaf phase: keep a coset iff its density estimate reaches 3 tau / 4 and
    // no surviving frequency was left unaddressed at the stop stage.
    uint32_t k = tree.depth();
    uint64_t m = uint64_t{1} << k;
    DensityGate gate(tau / 2.0, tau, conf);
    for (uint64_t addr = 0; addr < m; ++addr) {
        RandomSource lrng = rng.split("leaf").split(addr);
        std::function<int()> sampler;
        std::shared_ptr<CosetSpec> spec;
        if (k == 0) {
            sampler = [&lrng, &a, n]() { return a->query(lrng.point(n)); };
        } else {
            spec = std::make_shared<CosetSpec>(tree.labels(), address_bits(addr, k));
            sampler = [&lrng, &a, spec]() { return a->query(spec->sample(lrng)); };
        }
        auto [dense, est] = gate.run(sampler);
        LeafInfo& leaf = tree.leaves()[addr];
        leaf.density_estimate = est;
        leaf.zeroed_unresolved = stop_cosets[addr].survivor;
        leaf.keep = dense && !leaf.zeroed_unresolved;
    }
    out.construction_queries = a->query_count() - base_queries;
    return out;
}

// ---- implicit construction --------------------------------------------------

namespace {

// Uniform draws routed once through the current tree and bucketed by
// address. Coset points come from the matching bucket; subspace samples are
// sums of two same-address points. Every request is capped at 2^(k+7) fresh
// draws.
class RoutedPool {
  public:
    RoutedPool(std::shared_ptr<const SetOracle> a, const ParityDecisionTree& tree,
               RandomSource rng)
        : a_(std::move(a)), tree_(tree), rng_(rng) {
        reset();
    }

    void reset() { queues_.assign(tree_.leaf_count(), {}); }

    Point coset_point(uint64_t addr) {
        for (size_t d = 0; d <= cap(); ++d) {
            if (!queues_[addr].empty()) {
                Point p = queues_[addr].front();
                queues_[addr].pop_front();
                return p;
            }
            draw_one();
        }
        throw RejectionStall("coset sampling exceeded the retry cap");
    }

    Point subspace_sample() {
        for (size_t d = 0; d <= cap(); ++d) {
            for (auto& q : queues_) {
                if (q.size() >= 2) {
                    Point p1 = q.front();
                    q.pop_front();
                    Point p2 = q.front();
                    q.pop_front();
                    return p1 ^ p2;
                }
            }
            draw_one();
        }
        throw RejectionStall("subspace sampling exceeded the retry cap");
    }

  private:
    size_t cap() const { return (size_t{1} << (tree_.depth() + 7)) + 16; }

    void draw_one() {
        Point x = rng_.point(a_->dim());
        queues_[tree_.route(x, RouteMode::Direct)].push_back(x);
    }

    std::shared_ptr<const SetOracle> a_;
    const ParityDecisionTree& tree_;
    RandomSource rng_;
    std::vector<std::deque<Point>> queues_;
};

Point seed_transversal(const std::vector<Point>& seeds, uint64_t addr, uint32_t n) {
    Point r = Point::zero(n);
    for (size_t i = 0; i < seeds.size(); ++i)
        if ((addr >> i) & 1) r ^= seeds[i];
    return r;
}

// Candidate level value at an ambient point, before the level is attached.
int candidate_level_value(const ParityDecisionTree& tree, const ImplicitLevel& lvl,
                          const Point& x, RouteMode mode) {
    uint64_t addr = tree.route(x, mode);
    Point u = x ^ seed_transversal(tree.seeds(), addr, tree.dim());
    if (mode == RouteMode::Direct || lvl.ys.empty()) return lvl.decoder.eval(lvl.z0 ^ u) ^ lvl.c0;
    uint32_t ones = 0;
    for (size_t r = 0; r < lvl.ys.size(); ++r)
        ones += static_cast<uint32_t>(lvl.decoder.eval(lvl.z0 ^ u ^ lvl.ys[r]) ^ lvl.cy[r]);
    return ones > lvl.ys.size() / 2 ? 1 : 0;
}

}  // namespace

RegularityResult construct_implicit_dt(std::shared_ptr<const SetOracle> a,
                                       const RegularityBudget& budget, RandomSource& rng) {
    budget.validate();
    const uint32_t n = a->dim();
    const double eps = budget.eps, tau = budget.tau, gamma = budget.stop_fraction();
    const double conf = budget.confidence();

    RegularityResult out;
    out.tree = std::make_shared<ParityDecisionTree>(n, true);
    auto& tree = *out.tree;
    const uint64_t base_queries = a->query_count();

    RoutedPool pool(a, tree, rng.split("pool"));

    ImplicitGLOptions gl_opts;
    gl_opts.include_trivial = false;
    gl_opts.drop_constant = true;
    gl_opts.decoder_level_filter = true;
    gl_opts.correction_reps_override = 1;

    std::vector<CosetStageRecord> stop_cosets;
    for (uint32_t stage = 0;; ++stage) {
        if (stage >= budget.max_stages())
            throw BudgetExhausted("construct_implicit_dt: stage cap reached before the stop rule");
        uint32_t k = tree.depth();
        uint64_t m = uint64_t{1} << k;
        pool.reset();
        StageRecord rec;
        rec.stage = stage;
        rec.depth_before = k;

        struct Found {
            uint64_t addr;
            ImplicitLevel level;
            double estimate;
        };
        std::vector<Found> found;
        for (uint64_t addr = 0; addr < m; ++addr) {
            RandomSource crng = rng.split("stage").split(stage).split("gl").split(addr);
            Point z0 = pool.coset_point(addr);
            auto screen_sampler = [&]() { return a->query(pool.coset_point(addr)); };
            GLResult res;
            if (!screen_no_heavy(screen_sampler, eps, conf)) {
                SampledDomain dom;
                dom.ambient_n = n;
                dom.base = z0;
                dom.query = [a](const Point& x) { return a->query(x); };
                dom.direction = [&pool](RandomSource&) { return pool.subspace_sample(); };
                res = implicit_gl_core(dom, eps, conf, crng, gl_opts);
            }
            CosetStageRecord cr;
            cr.address = addr;
            if (!res.oracles.empty()) {
                const GLOracle& g = res.oracles.front();
                ImplicitLevel lvl;
                lvl.decoder = g.oracle.decoder();
                lvl.z0 = z0;
                lvl.c0 = static_cast<uint8_t>(lvl.decoder.eval(z0));
                lvl.ys.reserve(budget.route_reps);
                lvl.cy.reserve(budget.route_reps);
                for (uint32_t r = 0; r < budget.route_reps; ++r) {
                    Point y = pool.subspace_sample();
                    lvl.ys.push_back(y);
                    lvl.cy.push_back(static_cast<uint8_t>(lvl.decoder.eval(lvl.z0 ^ y)));
                }
                cr.survivor = true;
                cr.estimate = g.correlation;
                found.push_back({addr, std::move(lvl), g.correlation});
            }
            rec.cosets.push_back(cr);
        }

        bool stop = static_cast<double>(found.size()) <= gamma * static_cast<double>(m) + 1e-9;
        if (stop) {
            rec.depth_after = k;
            rec.stopped = true;
            rec.queries_after = a->query_count() - base_queries;
            stop_cosets = rec.cosets;
            out.transcript.push_back(rec);
            break;
        }

        RandomSource srng = rng.split("split").split(stage);
        for (auto& f : found) {
            if (tree.depth() >= budget.k_max)
                throw BudgetExhausted("construct_implicit_dt: codimension cap reached");
            // Sampled independence of the current levels plus the candidate.
            uint32_t kk = tree.depth();
            uint32_t num_points = kk + 1 + 40;
            RandomSource irng = srng.split("indep").split(f.addr);
            std::vector<Point> rows(kk + 1, Point(num_points));
            for (uint32_t j = 0; j < num_points; ++j) {
                Point x = irng.point(n);
                uint64_t addr = 0;
                for (uint32_t lv = 0; lv < kk; ++lv) {
                    int bit = tree.level_value(lv, x, addr, RouteMode::Direct);
                    rows[lv].set_bit(j, bit);
                    addr |= static_cast<uint64_t>(bit) << lv;
                }
                Point u = x ^ seed_transversal(tree.seeds(), addr, n);
                rows[kk].set_bit(j, f.level.decoder.eval(f.level.z0 ^ u) ^ f.level.c0);
            }
            if (GF2Matrix(rows).rank() != kk + 1) continue;

            // Seed with address e_{k+1}: existing levels zero, new level one.
            RandomSource qrng = srng.split("seed").split(f.addr);
            std::optional<Point> seed;
            size_t cap = (size_t{1} << (tree.depth() + 8)) + 16;
            for (size_t d = 0; d < cap; ++d) {
                Point x = qrng.point(n);
                if (tree.route(x, RouteMode::Direct) != 0) continue;
                if (candidate_level_value(tree, f.level, x, RouteMode::Direct) == 1) {
                    seed = x;
                    break;
                }
            }
            if (!seed) throw RejectionStall("seed search exceeded the retry cap");
            tree.add_implicit_level(std::move(f.level), *seed);
        }
        rec.depth_after = tree.depth();
        rec.queries_after = a->query_count() - base_queries;
        out.transcript.push_back(rec);
    }

    // Leaf phase.
    pool.reset();
    uint32_t k = tree.depth();
    uint64_t m = uint64_t{1} << k;
    DensityGate gate(tau / 2.0, tau, conf);
    for (uint64_t addr = 0; addr < m; ++addr) {
        auto sampler = [&pool, &a, addr]() { return a->query(pool.coset_point(addr)); };
        auto [dense, est] = gate.run(sampler);
        LeafInfo& leaf = tree.leaves()[addr];
        leaf.density_estimate = est;
        leaf.zeroed_unresolved = stop_cosets[addr].survivor;
        leaf.keep = dense && !leaf.zeroed_unresolved;
    }
    out.construction_queries = a->query_count() - base_queries;
    return out;
}

}  // namespace f2s
