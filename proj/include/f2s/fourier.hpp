#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "f2s/gf2.hpp"
#include "f2s/oracle.hpp"
#include "f2s/point.hpp"

namespace f2s {

// Dense table of all 2^n Fourier coefficients in the expectation convention:
// v[alpha] = E_x[f(x) chi_alpha(x)].
struct SpectrumTable {
    uint32_t n = 0;
    std::vector<double> v;

    double at(uint64_t alpha) const { return v[alpha]; }
    double at(const Point& alpha) const { return v[alpha.index()]; }

    // sup over nonzero frequencies of |coefficient|, with the argmax.
    std::pair<double, uint64_t> max_nontrivial() const;

    std::string to_csv() const;
};

// In-place unnormalized butterfly; out[a] = sum_x f[x] (-1)^<a,x>.
void wht_raw(std::vector<double>& f);
void wht_raw(std::vector<int64_t>& f);

// Normalized transform: coefficients E[f chi_alpha]. Throws on a
// non-power-of-two table length.
SpectrumTable wht(const std::vector<double>& f);

// Exact integer spectrum numerators: out[a] = sum_x f[x] (-1)^<a,x>, i.e.
// 2^n times the coefficient; for 0/1 tables this is exact.
std::vector<int64_t> wht_exact(const std::vector<int64_t>& f);

// h(x) = E_y[f(y) g(x+y)].
std::vector<double> convolve(const std::vector<double>& f, const std::vector<double>& g);

// Quadratic-time reference used to cross-check the transform route.
std::vector<double> convolve_direct(const std::vector<double>& f, const std::vector<double>& g);

// A coset H' = {x : <x, alpha_i> = b_i}. Stores a basis of H (the null space
// of the parities) and a particular point, so membership, enumeration and
// uniform sampling are all cheap. Parities must be linearly independent.
class CosetSpec {
  public:
    CosetSpec(std::vector<Point> parities, std::vector<int> b);

    uint32_t dim() const { return n_; }
    uint32_t codim() const { return static_cast<uint32_t>(parities_.size()); }
    uint32_t subdim() const { return n_ - codim(); }
    const std::vector<Point>& parities() const { return parities_; }
    const std::vector<int>& address() const { return b_; }
    const std::vector<Point>& h_basis() const { return h_basis_; }
    const Point& base_point() const { return base_; }

    bool contains(const Point& x) const;
    bool in_subspace(const Point& x) const;  // all parity bits zero

    // Point of H' for a (n-k)-bit combination index over the H basis.
    Point element(uint64_t combo) const;
    Point sample(RandomSource& rng) const;

    // Representative of the coset with address bits addr (the H-translate
    // classes B'); representative 0 is the base coset through base_point of
    // this spec's own address.
    Point representative(const std::vector<int>& addr) const;

    // Ambient lift of an H-frequency: solves <beta, h_j> = w_j. Defined
    // modulo span{alpha_i}; the returned lift is the RREF-canonical one.
    Point lift_frequency(const Point& w) const;

  private:
    uint32_t n_;
    std::vector<Point> parities_;
    std::vector<int> b_;
    std::vector<Point> h_basis_;
    Point base_;
};

// Restricted coefficient (1/2^{n-k}) sum_{x in H'} f(x) chi_beta(x) for
// beta in H. Throws if beta is not in H.
double coset_coeff(const std::vector<double>& f, const CosetSpec& c, const Point& beta);

// Spectrum of the coset view f_{H'} pulled back through the H basis; index w
// corresponds to the ambient frequency class lift_frequency(w) + span{alpha}.
SpectrumTable coset_spectrum(const std::vector<double>& f, const CosetSpec& c);

struct QuasirandomVerdict {
    bool quasirandom;
    double max_coeff;            // sup over the relevant nonzero frequencies
    std::optional<Point> witness;  // an ambient violating frequency, when any
};

QuasirandomVerdict is_quasirandom(const std::vector<double>& f, double eps);
QuasirandomVerdict is_quasirandom(const std::vector<double>& f, const CosetSpec& c, double eps);

// Exact-certificate variant for 0/1 tables at small n: compares integer
// numerators against eps * 2^n without float rounding (doubles are dyadic).
QuasirandomVerdict is_quasirandom_exact(const std::vector<int64_t>& f01, uint32_t n, double eps);

// Exact sumset A + A = {x + y : x, y in A}.
StoredSet brute_sumset(const StoredSet& a);

// Quadratic pairwise loop; independent route for cross-checks at small n.
StoredSet brute_sumset_pairwise(const StoredSet& a);

}  // namespace f2s
