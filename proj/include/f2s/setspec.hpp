#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "f2s/fourier.hpp"
#include "f2s/oracle.hpp"

namespace f2s {

// Declarative description of a test-set family. Generation is deterministic
// from (spec, seed): the same spec always produces the same set.
struct SetSpec {
    std::string kind;  // explicit | affine_subspace | coset_union | random | majority | noisy_coset_union
    uint32_t n = 0;

    std::vector<std::string> members;   // explicit: points in hex
    std::vector<std::string> basis;     // affine_subspace: subspace basis in hex
    std::string shift;                  // affine_subspace: translate in hex
    uint32_t codim = 0;                 // coset_union / affine_subspace tail policy
    std::vector<std::string> parities;  // coset_union: defining parities (default: tail bits)
    std::vector<uint64_t> addresses;    // coset_union: member coset addresses
    double density = 0.0;               // random
    double flip = 0.0;                  // noisy_coset_union: flip probability
    uint64_t seed = 0;                  // random / noisy generators

    static SetSpec from_json(const std::string& text);
    std::string to_json() const;
};

struct GeneratedSet {
    SetSpec spec;
    std::shared_ptr<SetOracle> oracle;            // counted access
    std::shared_ptr<const StoredSet> twin;        // exhaustive twin when n <= 24
    std::function<int(const Point&)> membership;  // uncounted ground-truth access
};

GeneratedSet generate(const SetSpec& spec);

// Exact export of a stored set as an explicit spec.
SetSpec to_setspec(const StoredSet& s);

}  // namespace f2s
