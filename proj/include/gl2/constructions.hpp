#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gl2/subgroup.hpp"

namespace gl2 {

struct Unsupported : std::runtime_error {
    explicit Unsupported(const std::string& what) : std::runtime_error(what) {}
};
struct ConstructionFailed : std::runtime_error {
    explicit ConstructionFailed(const std::string& what) : std::runtime_error(what) {}
};

// Degrees n for which a non-CM rational n-isogeny exists, and the prime ones.
struct IsogenyDegreeTable {
    static const std::vector<unsigned>& degrees();
    static const std::vector<unsigned>& prime_degrees();
    static bool admissible(unsigned n);
    static bool admissible_prime(unsigned p);
};

// Upper-triangular invertible matrices mod n.
Subgroup borel(residue_t n);

enum class CartanKind { Split, Nonsplit };

// Split Cartan: diagonal matrices.  Nonsplit: units of the quadratic extension
// F_n(sqrt eps) with eps the least positive non-residue mod n.  Odd prime n.
Subgroup cartan(residue_t n, CartanKind kind);
Subgroup cartan_normalizer(residue_t n, CartanKind kind);

// Full preimage in GL_2(F_l) of the subgroup of PGL_2(F_l) isomorphic to S4
// (unique up to conjugacy), realized as the normalizer of a Klein four-group.
Subgroup s4_normalizer(residue_t l);

struct IsogenyWitness {
    unsigned degree = 0;
    residue_t u = 0, v = 0;      // generator of the stable cyclic submodule
    std::string transcript;       // per-generator stabilizing checks
};

// Scans cyclic order-n submodules of (Z/n)^2 for G-stability; a witness exists
// iff G is conjugate into B_0(n).
std::optional<IsogenyWitness> rational_isogeny_test(const Subgroup& g, residue_t n);

Subgroup adjoin_minus_I(const Subgroup& g);

// <G,-I> together with every index-2 subgroup of <G,-I> not containing -I
// (the possible mod-n images across the quadratic twist family, n > 2).
std::vector<Subgroup> twist_family(const Subgroup& g, residue_t n);

}  // namespace gl2
