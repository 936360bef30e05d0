#include "f2s/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace f2s {

namespace {

void check_pow2(size_t len) {
    if (len == 0 || (len & (len - 1)) != 0)
        throw std::invalid_argument("wht: table length must be a power of two");
}

uint32_t log2_of(size_t len) {
    uint32_t n = 0;
    while ((size_t{1} << n) < len) ++n;
    return n;
}

template <typename T>
void butterfly(std::vector<T>& f) {
    check_pow2(f.size());
    for (size_t h = 1; h < f.size(); h <<= 1) {
        for (size_t i = 0; i < f.size(); i += h << 1) {
            for (size_t j = i; j < i + h; ++j) {
                T a = f[j], b = f[j + h];
                f[j] = a + b;
                f[j + h] = a - b;
            }
        }
    }
}

}  // namespace

void wht_raw(std::vector<double>& f) { butterfly(f); }
void wht_raw(std::vector<int64_t>& f) { butterfly(f); }

SpectrumTable wht(const std::vector<double>& f) {
    check_pow2(f.size());
    SpectrumTable s;
    s.n = log2_of(f.size());
    s.v = f;
    butterfly(s.v);
    double scale = 1.0 / static_cast<double>(f.size());
    for (double& x : s.v) x *= scale;
    return s;
}

std::vector<int64_t> wht_exact(const std::vector<int64_t>& f) {
    std::vector<int64_t> out = f;
    butterfly(out);
    return out;
}

std::pair<double, uint64_t> SpectrumTable::max_nontrivial() const {
    double best = 0.0;
    uint64_t arg = 0;
    for (uint64_t a = 1; a < v.size(); ++a) {
        double m = std::abs(v[a]);
        if (m > best) {
            best = m;
            arg = a;
        }
    }
    return {best, arg};
}

std::string SpectrumTable::to_csv() const {
    std::ostringstream os;
    os << "alpha_hex,coefficient\n";
    os.precision(17);
    for (uint64_t a = 0; a < v.size(); ++a)
        os << Point::from_index(n, a).to_hex() << "," << v[a] << "\n";
    return os.str();
}

std::vector<double> convolve(const std::vector<double>& f, const std::vector<double>& g) {
    if (f.size() != g.size()) throw std::invalid_argument("convolve: dimension mismatch");
    SpectrumTable fs = wht(f), gs = wht(g);
    std::vector<double> h(f.size());
    for (size_t a = 0; a < h.size(); ++a) h[a] = fs.v[a] * gs.v[a];
    butterfly(h);  // h(x) = sum_a fhat*ghat chi_a(x)
    return h;
}

std::vector<double> convolve_direct(const std::vector<double>& f, const std::vector<double>& g) {
    if (f.size() != g.size()) throw std::invalid_argument("convolve: dimension mismatch");
    size_t len = f.size();
    check_pow2(len);
    std::vector<double> h(len, 0.0);
    for (size_t x = 0; x < len; ++x) {
        double acc = 0.0;
        for (size_t y = 0; y < len; ++y) acc += f[y] * g[x ^ y];
        h[x] = acc / static_cast<double>(len);
    }
    return h;
}

CosetSpec::CosetSpec(std::vector<Point> parities, std::vector<int> b)
    : parities_(std::move(parities)), b_(std::move(b)) {
    if (parities_.empty()) throw std::invalid_argument("CosetSpec: needs at least one parity");
    if (parities_.size() != b_.size()) throw std::invalid_argument("CosetSpec: parity/address size mismatch");
    n_ = parities_.front().dim();
    GF2Matrix m(parities_);
    if (m.rank() != parities_.size())
        throw std::invalid_argument("CosetSpec: parities not linearly independent");

    LinearSystem sys = solve_parity_system(parities_, b_);
    base_ = sys.particular;
    h_basis_ = sys.null_basis;
}

bool CosetSpec::contains(const Point& x) const {
    for (size_t i = 0; i < parities_.size(); ++i)
        if (x.dot(parities_[i]) != (b_[i] & 1)) return false;
    return true;
}

bool CosetSpec::in_subspace(const Point& x) const {
    for (const auto& a : parities_)
        if (x.dot(a) != 0) return false;
    return true;
}

Point CosetSpec::element(uint64_t combo) const {
    Point x = base_;
    for (size_t j = 0; j < h_basis_.size(); ++j)
        if ((combo >> j) & 1) x ^= h_basis_[j];
    return x;
}

Point CosetSpec::sample(RandomSource& rng) const {
    size_t d = h_basis_.size();
    Point x = base_;
    size_t j = 0;
    while (j < d) {
        uint64_t w = rng.u64();
        for (size_t t = 0; t < 64 && j < d; ++t, ++j)
            if ((w >> t) & 1) x ^= h_basis_[j];
    }
    return x;
}

Point CosetSpec::representative(const std::vector<int>& addr) const {
    if (addr.size() != parities_.size())
        throw std::invalid_argument("CosetSpec::representative: address length mismatch");
    LinearSystem sys = solve_parity_system(parities_, addr);
    return sys.particular;
}

Point CosetSpec::lift_frequency(const Point& w) const {
    if (w.dim() != subdim()) throw std::invalid_argument("CosetSpec::lift_frequency: bad frequency dim");
    if (w.is_zero()) return Point::zero(n_);
    std::vector<int> target(h_basis_.size());
    for (size_t j = 0; j < h_basis_.size(); ++j) target[j] = w.bit(static_cast<uint32_t>(j));
    // Solve <beta, h_j> = w_j over beta; h rows are independent by construction.
    LinearSystem sys = solve_parity_system(h_basis_, target);
    return sys.particular;
}

double coset_coeff(const std::vector<double>& f, const CosetSpec& c, const Point& beta) {
    if (f.size() != (size_t{1} << c.dim())) throw std::invalid_argument("coset_coeff: table size mismatch");
    if (!c.in_subspace(beta)) throw std::invalid_argument("coset_coeff: beta not in H");
    uint64_t m = uint64_t{1} << c.subdim();
    double acc = 0.0;
    for (uint64_t combo = 0; combo < m; ++combo) {
        Point x = c.element(combo);
        double chi = beta.dot(x) ? -1.0 : 1.0;
        acc += f[x.index()] * chi;
    }
    return acc / static_cast<double>(m);
}

SpectrumTable coset_spectrum(const std::vector<double>& f, const CosetSpec& c) {
    uint32_t d = c.subdim();
    uint64_t m = uint64_t{1} << d;
    std::vector<double> g(m);
    for (uint64_t combo = 0; combo < m; ++combo) g[combo] = f[c.element(combo).index()];
    return wht(g);
}

QuasirandomVerdict is_quasirandom(const std::vector<double>& f, double eps) {
    SpectrumTable s = wht(f);
    auto [m, arg] = s.max_nontrivial();
    if (m <= eps) return {true, m, std::nullopt};
    return {false, m, Point::from_index(s.n, arg)};
}

QuasirandomVerdict is_quasirandom(const std::vector<double>& f, const CosetSpec& c, double eps) {
    SpectrumTable s = coset_spectrum(f, c);
    auto [m, arg] = s.max_nontrivial();
    if (m <= eps) return {true, m, std::nullopt};
    return {false, m, c.lift_frequency(Point::from_index(c.subdim(), arg))};
}

QuasirandomVerdict is_quasirandom_exact(const std::vector<int64_t>& f01, uint32_t n, double eps) {
    if (f01.size() != (size_t{1} << n)) throw std::invalid_argument("is_quasirandom_exact: size mismatch");
    std::vector<int64_t> num = wht_exact(f01);
    // |num[a]| / 2^n <= eps without rounding: eps is dyadic, so compare
    // |num[a]| * 2^52 against mantissa * 2^(n + exp + 52) using long double
    // only through exact integer arithmetic.
    int64_t best = 0;
    uint64_t arg = 0;
    for (uint64_t a = 1; a < num.size(); ++a) {
        int64_t m = std::llabs(num[a]);
        if (m > best) {
            best = m;
            arg = a;
        }
    }
    // Decompose eps = mant * 2^e2 exactly.
    int e2 = 0;
    double mant_d = std::frexp(eps, &e2);  // eps = mant_d * 2^e2, mant_d in [0.5, 1)
    unsigned long long mant = static_cast<unsigned long long>(std::ldexp(mant_d, 53));
    e2 -= 53;
    // Compare best <= eps * 2^n  <=>  best * 2^{-e2} <= mant * 2^n  (e2 < 0).
    __int128 lhs = static_cast<__int128>(best);
    __int128 rhs = static_cast<__int128>(mant);
    int shift_l = -e2 - static_cast<int>(n);
    bool ok;
    if (shift_l >= 0) {
        if (shift_l < 120)
            ok = (lhs << shift_l) <= rhs;
        else
            ok = best == 0;
    } else {
        ok = lhs <= (rhs << (-shift_l));
    }
    double maxc = static_cast<double>(best) / std::ldexp(1.0, static_cast<int>(n));
    if (ok) return {true, maxc, std::nullopt};
    return {false, maxc, Point::from_index(n, arg)};
}

StoredSet brute_sumset_pairwise(const StoredSet& a) {
    StoredSet out(a.dim());
    auto mem = a.members();
    for (size_t i = 0; i < mem.size(); ++i)
        for (size_t j = i; j < mem.size(); ++j) out.set(mem[i] ^ mem[j], true);
    return out;
}

StoredSet brute_sumset(const StoredSet& a) {
    uint64_t sz = a.size();
    uint64_t card = a.cardinality();
    if (card == 0) return StoredSet(a.dim());
    // Pairwise loop when cheap, exact integer convolution counts otherwise.
    if (card * card <= (sz << 4)) return brute_sumset_pairwise(a);
    std::vector<int64_t> t(sz, 0);
    for (uint64_t i = 0; i < sz; ++i) t[i] = a.member(i) ? 1 : 0;
    std::vector<int64_t> s = wht_exact(t);
    for (auto& x : s) x *= x;
    wht_raw(s);  // entries are now 2^n times the pair counts, exactly
    StoredSet out(a.dim());
    for (uint64_t i = 0; i < sz; ++i)
        if (s[i] != 0) out.set(i, true);
    return out;
}

}  // namespace f2s
