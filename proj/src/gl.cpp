#include "f2s/gl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace f2s {

namespace {

// Group-sequential mean-threshold gate: decides mean >= hi against
// mean <= lo with overall confidence 1-kappa, doubling checkpoints, and a
// cap that resolves the midpoint at half-gap precision. `range` is the width
// of the sample support (1 for indicators, 2 for +-1 products).
struct SeqGate {
    double lo, hi, mid, kappa, range;
    double lnterm;
    size_t m_max;
    static constexpr int kMaxCheckpoints = 24;

    SeqGate(double lo_, double hi_, double kappa_, double range_)
        : lo(lo_), hi(hi_), mid(0.5 * (lo_ + hi_)), kappa(kappa_), range(range_) {
        lnterm = std::log(4.0 * kMaxCheckpoints / kappa);
        double halfgap = 0.5 * (hi - lo);
        m_max = static_cast<size_t>(std::ceil(range * range * lnterm / (2.0 * halfgap * halfgap)));
    }

    double radius(size_t m) const { return range * std::sqrt(lnterm / (2.0 * static_cast<double>(m))); }

    // +1 mean-is-high, -1 mean-is-low, 0 keep sampling.
    int decide(double est, size_t m) const {
        if (m >= m_max) return est >= mid ? 1 : -1;
        double r = radius(m);
        if (est - r > lo) return 1;   // cannot be a low mean
        if (est + r < hi) return -1;  // cannot be a high mean
        return 0;
    }
};

size_t first_checkpoint(size_t base, size_t m_max) { return std::min(base, m_max); }
size_t next_checkpoint(size_t cur, size_t m_max) { return std::min(cur * 2, m_max); }

}  // namespace

// ---- linearity test -------------------------------------------------------

bool linearity_test(uint32_t n, const std::function<int(const Point&)>& D, double tau_c,
                    double tau_l, double kappa, RandomSource& rng) {
    if (!(tau_c < tau_l / 3.0))
        throw std::invalid_argument("linearity_test: requires tau_c < tau_l/3");
    if (kappa <= 0.0 || kappa >= 1.0) throw std::invalid_argument("linearity_test: bad kappa");

    // failure rate of the 3-point test: <= 3 tau_c when close to a parity
    // (>= 1 - 3 tau_c when close to a complement), >= tau_l when tau_l-far
    // from every affine function
    SeqGate gate(3.0 * tau_c, tau_l, kappa, 1.0);
    size_t fails = 0, m = 0;
    size_t cp = first_checkpoint(64, gate.m_max);
    for (;;) {
        Point x = rng.point(n), y = rng.point(n);
        fails += static_cast<size_t>(D(x) ^ D(y) ^ D(x ^ y));
        ++m;
        if (m < cp) continue;
        double rho = static_cast<double>(fails) / static_cast<double>(m);
        if (m >= gate.m_max) return std::min(rho, 1.0 - rho) <= gate.mid;
        double r = gate.radius(m);
        if (rho + r <= gate.hi || rho - r >= 1.0 - gate.hi) return true;
        if (rho - r >= gate.lo && rho + r <= 1.0 - gate.lo) return false;
        cp = next_checkpoint(cp, gate.m_max);
    }
}

// ---- candidates -----------------------------------------------------------

CandidateFamily build_candidates(std::shared_ptr<const SetOracle> a, double theta,
                                 RandomSource& rng) {
    if (theta <= 0.0 || theta > 1.0) throw std::invalid_argument("build_candidates: theta in (0,1]");
    uint32_t t = gl_table_exponent(theta);
    std::vector<Point> xs;
    xs.reserve(t);
    for (uint32_t i = 0; i < t; ++i) xs.push_back(rng.point(a->dim()));
    auto table = std::make_shared<VotingTable>(std::move(a), std::move(xs));
    return CandidateFamily{table, t};
}

ParityOracle local_correct(const Decoder& d, uint32_t correction_reps, RandomSource& rng,
                           uint32_t amplification) {
    return ParityOracle(d, correction_reps, amplification, rng.split("correct"));
}

FilterResult correlation_filter(const SetOracle& a, const ParityOracle& o, double theta,
                                double delta1, RandomSource& rng) {
    SeqGate gate(theta / 2.0, theta, delta1, 2.0);
    double acc = 0.0;
    size_t m = 0;
    size_t cp = first_checkpoint(128, gate.m_max);
    for (;;) {
        Point x = rng.point(a.dim());
        int av = a.query(x);
        if (av) acc += o.evaluate(x) ? -1.0 : 1.0;
        ++m;
        if (m < cp) continue;
        double est = std::abs(acc) / static_cast<double>(m);
        int verdict = gate.decide(est, m);
        if (verdict != 0 || m >= gate.m_max) return {est >= 0.75 * theta, est};
        cp = next_checkpoint(cp, gate.m_max);
    }
}

// ---- implicit GL ----------------------------------------------------------

SampledDomain full_domain(std::shared_ptr<const SetOracle> a) {
    SampledDomain dom;
    dom.ambient_n = a->dim();
    dom.base = Point::zero(a->dim());
    dom.query = [a](const Point& x) { return a->query(x); };
    uint32_t n = a->dim();
    dom.direction = [n](RandomSource& r) { return r.point(n); };
    return dom;
}

namespace {

struct Cluster {
    uint64_t rep;  // candidate index; 2^t means the trivial candidate
    uint64_t fingerprint;
    bool constant;
};

uint32_t ham64(uint64_t a, uint64_t b) { return static_cast<uint32_t>(std::popcount(a ^ b)); }

}  // namespace

GLResult implicit_gl_core(const SampledDomain& dom, double theta, double delta,
                          RandomSource& rng, const ImplicitGLOptions& opts) {
    if (theta <= 0.0 || theta > 1.0 || delta <= 0.0 || delta >= 1.0)
        throw std::invalid_argument("implicit_gl: theta and delta must lie in (0,1)");

    const uint32_t t = gl_table_exponent(theta);
    const uint32_t R = opts.correction_reps_override ? opts.correction_reps_override
                                                     : gl_correction_reps(delta);
    const double delta1 = delta * theta * theta / 4.0;
    const size_t nb = size_t{1} << t;
    const uint64_t trivial_idx = nb;

    // Voting table from subspace directions.
    RandomSource table_rng = rng.split("table");
    std::vector<Point> xs;
    xs.reserve(t);
    for (uint32_t i = 0; i < t; ++i) xs.push_back(dom.direction(table_rng));
    auto counted = std::make_shared<FunctionOracle>(dom.ambient_n, dom.query);
    auto table = std::make_shared<VotingTable>(counted, std::move(xs));

    // One shared sequential affinity test for all 2^t candidates; triples
    // live on the domain: base + u, base + v, base + u + v.
    SeqGate lin_gate(3.0 / 20.0, 1.0 / 5.0, delta1, 1.0);  // tau_c = 1/20, tau_l = 1/5
    std::vector<uint32_t> fails(nb, 0);
    std::vector<uint8_t> resolved(nb, 0), accepted(nb, 0);
    size_t unresolved = nb;
    {
        RandomSource lin_rng = rng.split("linearity");
        size_t m = 0;
        size_t cp = first_checkpoint(64, lin_gate.m_max);
        while (unresolved > 0) {
            Point u = dom.direction(lin_rng), v = dom.direction(lin_rng);
            auto d1 = VotingTable::decode_all(table->vote_vector(dom.base ^ u));
            auto d2 = VotingTable::decode_all(table->vote_vector(dom.base ^ v));
            auto d3 = VotingTable::decode_all(table->vote_vector(dom.base ^ u ^ v));
            for (size_t b = 0; b < nb; ++b)
                if (!resolved[b]) fails[b] += d1[b] ^ d2[b] ^ d3[b];
            ++m;
            if (m < cp) continue;
            for (size_t b = 0; b < nb; ++b) {
                if (resolved[b]) continue;
                double rho = static_cast<double>(fails[b]) / static_cast<double>(m);
                bool done = false, acc = false;
                if (m >= lin_gate.m_max) {
                    done = true;
                    acc = std::min(rho, 1.0 - rho) <= lin_gate.mid;
                } else {
                    double r = lin_gate.radius(m);
                    if (rho + r <= lin_gate.hi || rho - r >= 1.0 - lin_gate.hi) {
                        done = true;
                        acc = true;
                    } else if (rho - r >= lin_gate.lo && rho + r <= 1.0 - lin_gate.lo) {
                        done = true;
                    }
                }
                if (done) {
                    resolved[b] = 1;
                    accepted[b] = acc ? 1 : 0;
                    --unresolved;
                }
            }
            cp = next_checkpoint(cp, lin_gate.m_max);
        }
    }

    std::vector<uint64_t> acc_idx;
    for (size_t b = 0; b < nb; ++b)
        if (accepted[b]) acc_idx.push_back(b);

    // Fingerprints: decoder bits on shared probes. Candidates decoding one
    // parity agree (or anti-agree, for complement pairs) almost everywhere;
    // distinct parities agree on about half.
    const uint32_t fp_bits = opts.fingerprint_bits;
    std::vector<uint64_t> fp(acc_idx.size(), 0);
    {
        RandomSource probe_rng = rng.split("probes");
        for (uint32_t j = 0; j < fp_bits; ++j) {
            Point p = dom.base ^ dom.direction(probe_rng);
            auto db = VotingTable::decode_all(table->vote_vector(p));
            for (size_t i = 0; i < acc_idx.size(); ++i)
                fp[i] |= static_cast<uint64_t>(db[acc_idx[i]]) << j;
        }
    }

    // Cluster by fingerprint distance.
    const uint32_t near = fp_bits / 4, far = fp_bits - fp_bits / 4;
    std::vector<size_t> parent(acc_idx.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<size_t(size_t)> find = [&](size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (size_t i = 0; i < acc_idx.size(); ++i)
        for (size_t j = i + 1; j < acc_idx.size(); ++j) {
            uint32_t h = ham64(fp[i], fp[j]);
            if (h <= near || h >= far) {
                size_t a = find(i), b = find(j);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
        }

    std::vector<Cluster> clusters;
    {
        std::vector<int> cluster_of(acc_idx.size(), -1);
        for (size_t i = 0; i < acc_idx.size(); ++i) {
            size_t root = find(i);
            if (cluster_of[root] < 0) {
                cluster_of[root] = static_cast<int>(clusters.size());
                uint32_t h0 = static_cast<uint32_t>(std::popcount(fp[root]));
                clusters.push_back({acc_idx[root], fp[root], h0 <= near || h0 >= far});
            }
        }
    }

    // Supplemental trivial candidate: represents the constant cluster, or
    // stands alone. It decodes the empty parity exactly, which is what makes
    // the beta = 0 guarantee attainable for dense sets.
    if (opts.include_trivial) {
        bool attached = false;
        for (auto& c : clusters) {
            if (c.constant) {
                c.rep = trivial_idx;
                attached = true;
                break;
            }
        }
        if (!attached) clusters.push_back({trivial_idx, 0, true});
    }
    if (opts.drop_constant) {
        clusters.erase(std::remove_if(clusters.begin(), clusters.end(),
                                      [](const Cluster& c) { return c.constant; }),
                       clusters.end());
    }

    // Correct each representative and filter by correlation.
    struct Kept {
        uint64_t idx;
        ParityOracle oracle;
        double est;
    };
    std::vector<Kept> kept;
    RandomSource corr_rng = rng.split("correct");
    RandomSource filt_rng = rng.split("filter");
    SeqGate filt_gate(theta / 2.0, theta, delta1, 2.0);

    auto make_oracle = [&](uint64_t idx) {
        if (idx == trivial_idx) return ParityOracle::trivial(dom.ambient_n);
        RandomSource r = corr_rng.split(idx);
        return local_correct(Decoder(table, static_cast<uint32_t>(idx)), R, r);
    };

    if (opts.decoder_level_filter) {
        // Shared samples, decoder-level estimates: the corrected machine only
        // attenuates the correlation, so filtering on D_b keeps soundness and
        // costs one vote sweep per sample instead of 2R decoder evaluations.
        std::vector<double> acc(clusters.size(), 0.0);
        std::vector<int> verdicts(clusters.size(), 0);
        size_t open = clusters.size(), m = 0;
        size_t cp = first_checkpoint(256, filt_gate.m_max);
        while (open > 0) {
            Point x = dom.base ^ dom.direction(filt_rng);
            int av = dom.query(x);
            std::vector<uint8_t> votes;
            if (av) votes = table->vote_vector(x);
            for (size_t ci = 0; ci < clusters.size(); ++ci) {
                if (verdicts[ci] != 0 || !av) continue;
                int bit = clusters[ci].rep == trivial_idx
                              ? 0
                              : VotingTable::decode(votes, static_cast<uint32_t>(clusters[ci].rep));
                acc[ci] += bit ? -1.0 : 1.0;
            }
            ++m;
            if (m < cp) continue;
            for (size_t ci = 0; ci < clusters.size(); ++ci) {
                if (verdicts[ci] != 0) continue;
                double est = std::abs(acc[ci]) / static_cast<double>(m);
                if (filt_gate.decide(est, m) != 0 || m >= filt_gate.m_max) {
                    verdicts[ci] = est >= 0.75 * theta ? 1 : -1;
                    --open;
                    if (verdicts[ci] > 0)
                        kept.push_back(Kept{clusters[ci].rep, make_oracle(clusters[ci].rep), est});
                }
            }
            cp = next_checkpoint(cp, filt_gate.m_max);
        }
    } else {
        for (auto& c : clusters) {
            ParityOracle o = make_oracle(c.rep);
            RandomSource est_rng = filt_rng.split(c.rep);
            double acc = 0.0;
            size_t m = 0;
            size_t cp = first_checkpoint(128, filt_gate.m_max);
            double est = 0.0;
            for (;;) {
                Point x = dom.base ^ dom.direction(est_rng);
                int av = dom.query(x);
                if (av) acc += o.evaluate(x) ? -1.0 : 1.0;
                ++m;
                if (m < cp) continue;
                est = std::abs(acc) / static_cast<double>(m);
                if (filt_gate.decide(est, m) != 0 || m >= filt_gate.m_max) break;
                cp = next_checkpoint(cp, filt_gate.m_max);
            }
            if (est >= 0.75 * theta) kept.push_back(Kept{c.rep, std::move(o), est});
        }
    }

    // Cross-cluster dedup: agreement of the corrected machines on shared
    // points; distinct parities agree on about half.
    std::sort(kept.begin(), kept.end(), [](const Kept& a, const Kept& b) { return a.idx < b.idx; });
    if (kept.size() > 1) {
        RandomSource dd_rng = rng.split("dedup");
        const uint32_t pts = 64;
        std::vector<Point> probes;
        probes.reserve(pts);
        for (uint32_t j = 0; j < pts; ++j) probes.push_back(dom.base ^ dom.direction(dd_rng));
        std::vector<uint64_t> bits(kept.size(), 0);
        for (size_t i = 0; i < kept.size(); ++i)
            for (uint32_t j = 0; j < pts; ++j)
                bits[i] |= static_cast<uint64_t>(kept[i].oracle.evaluate(probes[j])) << j;
        std::vector<uint8_t> dup(kept.size(), 0);
        for (size_t i = 0; i < kept.size(); ++i) {
            if (dup[i]) continue;
            for (size_t j = i + 1; j < kept.size(); ++j)
                if (!dup[j] && ham64(bits[i], bits[j]) <= pts / 4) dup[j] = 1;
        }
        std::vector<Kept> uniq;
        for (size_t i = 0; i < kept.size(); ++i)
            if (!dup[i]) uniq.push_back(std::move(kept[i]));
        kept = std::move(uniq);
    }

    // T <= 4/theta^2 survivors.
    size_t cap = static_cast<size_t>(std::ceil(4.0 / (theta * theta)));
    if (kept.size() > cap) {
        std::stable_sort(kept.begin(), kept.end(),
                         [](const Kept& a, const Kept& b) { return a.est > b.est; });
        kept.erase(kept.begin() + static_cast<long>(cap), kept.end());
        std::stable_sort(kept.begin(), kept.end(),
                         [](const Kept& a, const Kept& b) { return a.idx < b.idx; });
    }

    GLResult out;
    out.t = t;
    out.correction_reps = R;
    for (auto& k : kept) out.oracles.push_back({std::move(k.oracle), k.est, k.idx});
    return out;
}

GLResult implicit_gl(std::shared_ptr<const SetOracle> a, double theta, double delta,
                     RandomSource& rng, const ImplicitGLOptions& opts) {
    return implicit_gl_core(full_domain(std::move(a)), theta, delta, rng, opts);
}

// ---- explicit GL ----------------------------------------------------------

CoordDomain full_coord_domain(std::shared_ptr<const SetOracle> a) {
    CoordDomain dom;
    dom.d = a->dim();
    dom.query = [a](const Point& u) { return a->query(u); };
    if (dom.d <= 64) {
        uint32_t n = dom.d;
        dom.query_idx = [a, n](uint64_t idx) { return a->query(Point::from_index(n, idx)); };
    }
    return dom;
}

CoordDomain coset_coord_domain(std::shared_ptr<const SetOracle> a,
                               std::shared_ptr<const CosetSpec> c) {
    CoordDomain dom;
    dom.d = c->subdim();
    dom.query = [a, c](const Point& u) {
        Point x = c->base_point();
        for (uint32_t j = 0; j < u.dim(); ++j)
            if (u.bit(j)) x ^= c->h_basis()[j];
        return a->query(x);
    };
    if (dom.d <= 64) {
        dom.query_idx = [a, c](uint64_t u) {
            Point x = c->base_point();
            while (u) {
                uint64_t low = u & (~u + 1);
                x ^= c->h_basis()[std::countr_zero(low)];
                u ^= low;
            }
            return a->query(x);
        };
    }
    return dom;
}

namespace {

// x = (u on the low j coordinates, v on the rest).
Point splice(uint32_t d, uint32_t j, const Point& u, const Point& v) {
    Point x(d);
    for (uint32_t i = 0; i < j; ++i) x.set_bit(i, u.bit(i));
    for (uint32_t i = j; i < d; ++i) x.set_bit(i, v.bit(i - j));
    return x;
}

int prefix_chi(const std::vector<uint8_t>& prefix, const Point& u) {
    int s = 0;
    for (size_t i = 0; i < prefix.size(); ++i) s ^= prefix[i] & u.bit(static_cast<uint32_t>(i));
    return s;
}

}  // namespace

std::vector<ExplicitCoefficient> explicit_gl_core(const CoordDomain& dom, double theta,
                                                  double delta, RandomSource& rng,
                                                  bool first_hit, bool skip_zero) {
    if (theta <= 0.0 || theta > 1.0 || delta <= 0.0 || delta >= 1.0)
        throw std::invalid_argument("explicit_gl: theta and delta must lie in (0,1)");
    const uint32_t d = dom.d;
    const size_t list_cap = static_cast<size_t>(std::ceil(4.0 / (theta * theta)));
    const size_t est_cap = (2 * d + 1) * list_cap + 8;
    const double delta_est = delta / static_cast<double>(est_cap);

    // Bucket weights sum over the bucket of ghat^2: descend everything above
    // theta^2, never descend below theta^2/4.
    SeqGate wgate(theta * theta / 4.0, theta * theta, delta_est, 2.0);
    const size_t m_coeff = chernoff_samples(theta / 4.0, delta_est);

    size_t expansions = 0;
    const size_t expansion_cap = 4 * est_cap + 64;

    RandomSource wrng = rng.split("weights");
    RandomSource crng = rng.split("coeffs");

    const bool packed = static_cast<bool>(dom.query_idx) && d <= 64;
    auto mask_of = [](uint32_t bits) { return bits >= 64 ? ~uint64_t{0} : (uint64_t{1} << bits) - 1; };

    auto weight_high = [&](const std::vector<uint8_t>& prefix) {
        uint32_t j = static_cast<uint32_t>(prefix.size());
        RandomSource r = wrng.split(++expansions);
        double acc = 0.0;
        size_t m = 0;
        size_t cp = first_checkpoint(128, wgate.m_max);
        if (packed) {
            uint64_t pref = 0;
            for (uint32_t i = 0; i < j; ++i) pref |= static_cast<uint64_t>(prefix[i]) << i;
            uint64_t umask = mask_of(j), vmask = mask_of(d - j);
            for (;;) {
                uint64_t u1 = r.u64() & umask, u2 = r.u64() & umask;
                uint64_t v = j == d ? 0 : (r.u64() & vmask) << j;
                int g1 = dom.query_idx(u1 | v), g2 = dom.query_idx(u2 | v);
                if (g1 && g2)
                    acc += (std::popcount(pref & (u1 ^ u2)) & 1) ? -1.0 : 1.0;
                ++m;
                if (m < cp) continue;
                if (m >= wgate.m_max) return acc / static_cast<double>(m) >= wgate.mid;
                int verdict = wgate.decide(acc / static_cast<double>(m), m);
                if (verdict != 0) return verdict > 0;
                cp = next_checkpoint(cp, wgate.m_max);
            }
        }
        for (;;) {
            Point u1 = r.point(j), u2 = r.point(j);
            int g1, g2;
            if (j == d) {
                g1 = dom.query(u1);
                g2 = dom.query(u2);
            } else {
                Point v = r.point(d - j);
                g1 = dom.query(splice(d, j, u1, v));
                g2 = dom.query(splice(d, j, u2, v));
            }
            if (g1 && g2) acc += (prefix_chi(prefix, u1) ^ prefix_chi(prefix, u2)) ? -1.0 : 1.0;
            ++m;
            if (m < cp) continue;
            if (m >= wgate.m_max) return acc / static_cast<double>(m) >= wgate.mid;
            int v = wgate.decide(acc / static_cast<double>(m), m);
            if (v != 0) return v > 0;
            cp = next_checkpoint(cp, wgate.m_max);
        }
    };

    auto coeff_estimate = [&](const Point& w) {
        RandomSource r = crng.split(w.hash());
        double acc = 0.0;
        if (packed) {
            uint64_t wi = w.index(), dmask = mask_of(d);
            for (size_t i = 0; i < m_coeff; ++i) {
                uint64_t x = r.u64() & dmask;
                if (dom.query_idx(x)) acc += (std::popcount(wi & x) & 1) ? -1.0 : 1.0;
            }
            return acc / static_cast<double>(m_coeff);
        }
        for (size_t i = 0; i < m_coeff; ++i) {
            Point x = r.point(d);
            int g = dom.query(x);
            if (g) acc += w.dot(x) ? -1.0 : 1.0;
        }
        return acc / static_cast<double>(m_coeff);
    };

    std::vector<ExplicitCoefficient> out;
    // DFS, zero branch first: discovery order is deterministic.
    std::function<bool(std::vector<uint8_t>&)> expand = [&](std::vector<uint8_t>& prefix) -> bool {
        if (expansions > expansion_cap)
            throw std::runtime_error("explicit_gl: expansion budget exceeded");
        if (prefix.size() == d) {
            Point w(d);
            for (uint32_t i = 0; i < d; ++i) w.set_bit(i, prefix[i]);
            if (skip_zero && w.is_zero()) return false;
            double est = coeff_estimate(w);
            if (std::abs(est) >= 0.75 * theta) {
                out.push_back({w, est});
                if (first_hit) return true;
            }
            return false;
        }
        for (uint8_t bit : {uint8_t{0}, uint8_t{1}}) {
            prefix.push_back(bit);
            bool stop = weight_high(prefix) && expand(prefix);
            prefix.pop_back();
            if (stop) return true;
        }
        return false;
    };

    std::vector<uint8_t> root;
    expand(root);

    if (out.size() > list_cap) {
        std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            return std::abs(a.estimate) > std::abs(b.estimate);
        });
        out.resize(list_cap);
    }
    return out;
}

std::vector<ExplicitCoefficient> explicit_gl(std::shared_ptr<const SetOracle> a, double theta,
                                             double delta, RandomSource& rng) {
    return explicit_gl_core(full_coord_domain(std::move(a)), theta, delta, rng, false);
}

}  // namespace f2s
