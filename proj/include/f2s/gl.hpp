#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "f2s/fourier.hpp"
#include "f2s/parity_oracle.hpp"

namespace f2s {

// ---- shared parameter formulas ----------------------------------------

// Voting-table size exponent; the +5 makes 2^t >= 32/theta^2, which drives
// the pairwise-independence majority error below 1/10.
inline uint32_t gl_table_exponent(double theta) {
    double raw = std::log2(1.0 / (theta * theta));
    return static_cast<uint32_t>(std::ceil(std::max(0.0, raw))) + 5;
}

// Correction repetitions; odd by construction (41 at delta = 0.1).
inline uint32_t gl_correction_reps(double delta) {
    return 2 * static_cast<uint32_t>(std::ceil(6.0 * std::log(2.0 / delta))) + 5;
}

// Sample count for a +-prec estimate at confidence 1-conf.
inline size_t chernoff_samples(double prec, double conf) {
    return static_cast<size_t>(std::ceil(2.0 * std::log(2.0 / conf) / (prec * prec)));
}

// ---- linearity testing --------------------------------------------------

// Group-sequential two-tail BLR affinity test. Accepts (w.p. >= 1-kappa)
// when D is tau_c-close to some parity or to the complement of one; rejects
// (w.p. >= 1-kappa) when D is tau_l-far from all of them. Complement
// closeness shows up as a failure rate near 1 and is accepted deliberately:
// downstream local correction cancels a global complement. Requires
// tau_c < tau_l / 3.
bool linearity_test(uint32_t n, const std::function<int(const Point&)>& D, double tau_c,
                    double tau_l, double kappa, RandomSource& rng);

// ---- candidate construction ---------------------------------------------

struct CandidateFamily {
    std::shared_ptr<const VotingTable> table;
    uint32_t t = 0;

    Decoder decoder(uint32_t b) const { return Decoder(table, b); }
    size_t count() const { return size_t{1} << t; }
};

// Draws the voting table X_1..X_t with t = ceil(log2(1/theta^2)) + 5.
CandidateFamily build_candidates(std::shared_ptr<const SetOracle> a, double theta,
                                 RandomSource& rng);

// Majority correction of an accepted decoder into a parity-oracle machine.
ParityOracle local_correct(const Decoder& d, uint32_t correction_reps, RandomSource& rng,
                           uint32_t amplification = 1);

// ---- correlation filtering ----------------------------------------------

struct FilterResult {
    bool keep;
    double estimate;  // |E[A(x) * (-1)^{O(x)}]|, the indicator-convention coefficient
};

// Estimates the correlation to +-theta/4 at confidence 1-delta1 and keeps
// the oracle iff the estimate reaches 3*theta/4.
FilterResult correlation_filter(const SetOracle& a, const ParityOracle& o, double theta,
                                double delta1, RandomSource& rng);

// ---- implicit Goldreich-Levin -------------------------------------------

struct GLOracle {
    ParityOracle oracle;
    double correlation = 0.0;   // filter estimate
    uint64_t candidate = 0;     // offset pattern b; 2^t for the trivial candidate
};

struct GLResult {
    uint32_t t = 0;
    uint32_t correction_reps = 0;
    std::vector<GLOracle> oracles;
};

// Abstracted sample access for running the list decoder on a coset domain:
// evaluation points are base + (direction), directions span the acting
// subspace. The full-space instantiation uses base = 0 and uniform
// directions.
struct SampledDomain {
    uint32_t ambient_n = 0;
    Point base;                                   // a point of the domain
    std::function<int(const Point&)> query;       // counted membership at ambient points
    std::function<Point(RandomSource&)> direction;  // uniform on the acting subspace
};

SampledDomain full_domain(std::shared_ptr<const SetOracle> a);

struct ImplicitGLOptions {
    bool include_trivial = true;    // supplemental constant-0 candidate for the empty parity
    bool drop_constant = false;     // drop constant clusters (regularity stages want beta != 0)
    bool decoder_level_filter = false;  // estimate correlations on D_b instead of the corrected machine
    uint32_t fingerprint_bits = 64;
    uint32_t correction_reps_override = 0;  // 0: use the delta-derived default
};

// Full pipeline over an arbitrary sampled domain; the public entry points
// below wrap it. theta is measured against the domain-restricted function.
GLResult implicit_gl_core(const SampledDomain& dom, double theta, double delta,
                          RandomSource& rng, const ImplicitGLOptions& opts);

// List correction of A itself: with probability 1-delta every output machine
// computes a distinct parity with |Ahat(alpha)| >= theta/2, and every alpha
// with |Ahat(alpha)| >= theta is represented. Query cost depends only on
// (theta, delta) and the unfolding of the sequential tests, never on n.
GLResult implicit_gl(std::shared_ptr<const SetOracle> a, double theta, double delta,
                     RandomSource& rng, const ImplicitGLOptions& opts = {});

// ---- explicit Goldreich-Levin (prefix buckets) ---------------------------

struct ExplicitCoefficient {
    Point freq;        // frequency in domain coordinates
    double estimate;   // signed coefficient estimate
};

struct CoordDomain {
    uint32_t d = 0;
    std::function<int(const Point&)> query;  // g on F2^d, counted by the caller's oracle
    std::function<int(uint64_t)> query_idx;  // packed fast path, set when d <= 64
};

CoordDomain full_coord_domain(std::shared_ptr<const SetOracle> a);
CoordDomain coset_coord_domain(std::shared_ptr<const SetOracle> a,
                               std::shared_ptr<const CosetSpec> c);

// Classic bucket-descent list decoder: returns frequencies whose coefficient
// estimate reaches 3*theta/4; within confidence delta no |ghat| >= theta is
// missed and nothing below theta/2 is returned. first_hit stops at the first
// surviving frequency in DFS order.
std::vector<ExplicitCoefficient> explicit_gl_core(const CoordDomain& dom, double theta,
                                                  double delta, RandomSource& rng,
                                                  bool first_hit = false, bool skip_zero = false);

std::vector<ExplicitCoefficient> explicit_gl(std::shared_ptr<const SetOracle> a, double theta,
                                             double delta, RandomSource& rng);

}  // namespace f2s
