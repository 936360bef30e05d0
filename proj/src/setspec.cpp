#include "f2s/setspec.hpp"

#include <json.hpp>

#include "f2s/gf2.hpp"

namespace f2s {

using nlohmann::json;

namespace {

uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic per-point coin with measure p.
bool point_coin(const Point& x, uint64_t seed, double p) {
    uint64_t z = mix64(x.hash() ^ mix64(seed));
    return static_cast<double>(z >> 11) * 0x1.0p-53 < p;
}

std::vector<Point> parse_points(const std::vector<std::string>& hex, uint32_t n,
                                const char* what) {
    std::vector<Point> out;
    out.reserve(hex.size());
    for (const auto& h : hex) {
        Point p = Point::from_hex(h);
        if (p.dim() != n) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
        out.push_back(p);
    }
    return out;
}

}  // namespace

SetSpec SetSpec::from_json(const std::string& text) {
    json j = json::parse(text);
    SetSpec s;
    s.kind = j.at("kind").get<std::string>();
    s.n = j.at("n").get<uint32_t>();
    if (j.contains("members")) s.members = j["members"].get<std::vector<std::string>>();
    if (j.contains("basis")) s.basis = j["basis"].get<std::vector<std::string>>();
    if (j.contains("shift")) s.shift = j["shift"].get<std::string>();
    if (j.contains("codim")) s.codim = j["codim"].get<uint32_t>();
    if (j.contains("parities")) s.parities = j["parities"].get<std::vector<std::string>>();
    if (j.contains("addresses")) s.addresses = j["addresses"].get<std::vector<uint64_t>>();
    if (j.contains("density")) s.density = j["density"].get<double>();
    if (j.contains("flip")) s.flip = j["flip"].get<double>();
    if (j.contains("seed")) s.seed = j["seed"].get<uint64_t>();
    return s;
}

std::string SetSpec::to_json() const {
    json j;
    j["kind"] = kind;
    j["n"] = n;
    if (!members.empty()) j["members"] = members;
    if (!basis.empty()) j["basis"] = basis;
    if (!shift.empty()) j["shift"] = shift;
    if (codim) j["codim"] = codim;
    if (!parities.empty()) j["parities"] = parities;
    if (!addresses.empty()) j["addresses"] = addresses;
    if (density > 0.0) j["density"] = density;
    if (flip > 0.0) j["flip"] = flip;
    if (seed) j["seed"] = seed;
    return j.dump();
}

GeneratedSet generate(const SetSpec& spec) {
    const uint32_t n = spec.n;
    if (n == 0) throw std::invalid_argument("generate: n must be positive");
    std::function<int(const Point&)> membership;

    if (spec.kind == "explicit") {
        if (n > StoredSet::kMaxDim)
            throw std::invalid_argument("generate: explicit sets require n <= 24");
        auto members = std::make_shared<StoredSet>(n);
        for (const auto& h : spec.members) {
            Point p = Point::from_hex(h);
            if (p.dim() != n) throw std::invalid_argument("generate: member dimension mismatch");
            members->set(p.index(), true);
        }
        membership = [members](const Point& x) { return members->member(x.index()) ? 1 : 0; };
    } else if (spec.kind == "affine_subspace") {
        std::vector<Point> checks;  // parity checks of the subspace
        Point shift = spec.shift.empty() ? Point::zero(n) : Point::from_hex(spec.shift);
        if (shift.dim() != n) throw std::invalid_argument("generate: shift dimension mismatch");
        if (!spec.basis.empty()) {
            std::vector<Point> basis = parse_points(spec.basis, n, "generate basis");
            GF2Matrix m(basis);
            if (m.rank() != basis.size())
                throw std::invalid_argument("generate: basis must be independent");
            // dual: all alpha with <alpha, b_i> = 0
            std::vector<int> zeros(basis.size(), 0);
            checks = solve_parity_system(basis, zeros).null_basis;
        } else {
            if (spec.codim == 0 || spec.codim >= n)
                throw std::invalid_argument("generate: affine_subspace needs basis or codim");
            for (uint32_t j = 0; j < spec.codim; ++j) {
                Point p(n);
                p.set_bit(j, 1);
                checks.push_back(p);
            }
        }
        membership = [checks, shift](const Point& x) {
            Point d = x ^ shift;
            for (const auto& c : checks)
                if (d.dot(c)) return 0;
            return 1;
        };
    } else if (spec.kind == "coset_union" || spec.kind == "noisy_coset_union") {
        uint32_t k = spec.codim;
        if (k == 0 || k > 24) throw std::invalid_argument("generate: coset_union needs codim");
        std::vector<Point> pars;
        if (!spec.parities.empty()) {
            pars = parse_points(spec.parities, n, "generate parities");
            if (pars.size() != k) throw std::invalid_argument("generate: parity count != codim");
            GF2Matrix m(pars);
            if (m.rank() != k) throw std::invalid_argument("generate: parities dependent");
        } else {
            // tail policy: address bit j reads packed bit j, so the drawn
            // addresses are identical across ambient dimensions
            for (uint32_t j = 0; j < k; ++j) {
                Point p(n);
                p.set_bit(j, 1);
                pars.push_back(p);
            }
        }
        uint64_t addr_mask = 0;
        for (uint64_t a : spec.addresses) {
            if (a >= (uint64_t{1} << k)) throw std::invalid_argument("generate: address out of range");
            addr_mask |= uint64_t{1} << a;
        }
        double flip = spec.kind == "noisy_coset_union" ? spec.flip : 0.0;
        uint64_t seed = spec.seed;
        membership = [pars, addr_mask, flip, seed](const Point& x) {
            uint64_t addr = 0;
            for (size_t j = 0; j < pars.size(); ++j)
                addr |= static_cast<uint64_t>(x.dot(pars[j])) << j;
            int base = (addr_mask >> addr) & 1;
            if (flip > 0.0 && point_coin(x, seed, flip)) base ^= 1;
            return base;
        };
    } else if (spec.kind == "random") {
        if (spec.density < 0.0 || spec.density > 1.0)
            throw std::invalid_argument("generate: density in [0,1]");
        double density = spec.density;
        uint64_t seed = spec.seed;
        membership = [density, seed](const Point& x) {
            return point_coin(x, seed, density) ? 1 : 0;
        };
    } else if (spec.kind == "majority") {
        membership = [n](const Point& x) { return 2 * x.popcount() >= n ? 1 : 0; };
    } else {
        throw std::invalid_argument("generate: unknown kind '" + spec.kind + "'");
    }

    GeneratedSet out;
    out.spec = spec;
    out.membership = membership;
    out.oracle = std::make_shared<FunctionOracle>(n, membership);
    if (n <= StoredSet::kMaxDim) {
        auto twin = std::make_shared<StoredSet>(n);
        for (uint64_t x = 0; x < twin->size(); ++x)
            twin->set(x, membership(Point::from_index(n, x)) != 0);
        out.twin = twin;
    }
    return out;
}

SetSpec to_setspec(const StoredSet& s) {
    SetSpec spec;
    spec.kind = "explicit";
    spec.n = s.dim();
    for (uint64_t idx : s.members())
        spec.members.push_back(Point::from_index(s.dim(), idx).to_hex());
    return spec;
}

}  // namespace f2s
