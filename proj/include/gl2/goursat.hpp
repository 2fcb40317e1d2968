#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "gl2/subgroup.hpp"

namespace gl2 {

struct InvalidQuotientMap : std::runtime_error {
    explicit InvalidQuotientMap(const std::string& what) : std::runtime_error(what) {}
};
struct NotSubdirect : std::runtime_error {
    explicit NotSubdirect(const std::string& what) : std::runtime_error(what) {}
};

// A subgroup of A x B (coprime moduli, CRT-joined) surjecting onto both
// factors, together with the Goursat quotient order.
struct SubdirectProduct {
    Subgroup factor_a;
    Subgroup factor_b;
    Subgroup joint;            // at modulus lcm
    std::uint64_t quotient_order = 1;
};

// Common-quotient data: matched normal subgroups with an isomorphism of the
// quotients given by generator pairing.
struct QuotientMatch {
    std::uint64_t order = 1;
    Subgroup kernel_a;  // normal in A
    Subgroup kernel_b;  // normal in B
    // generator pairing describing the isomorphism A/N_A -> B/N_B
    std::vector<std::pair<Mat2, Mat2>> pairing;
};

// Fiber product A x_Q B from kernel-plus-matching data.  Throws
// InvalidQuotientMap if the data does not describe matched surjections.
SubdirectProduct fiber_product(const Subgroup& a, const Subgroup& b, const QuotientMatch& q);

// |Q| = |A||B|/|C| for a subdirect C <= A x B; throws NotSubdirect when C
// fails to surject onto a factor.
std::uint64_t goursat_quotient_order(const SubdirectProduct& c);
std::uint64_t goursat_quotient_order(const Subgroup& a, const Subgroup& b, const Subgroup& joint);

// All normal subgroups of the enumerated group (unions of conjugacy classes
// closed under generation), optionally restricted to index <= index_bound.
std::vector<ElementList> normal_subgroups(const Subgroup& g, std::uint64_t index_bound = UINT64_MAX);

// Orders |Q| of common quotients of A and B up to the bound, with witnesses.
std::map<std::uint64_t, QuotientMatch> common_quotient_orders(const Subgroup& a, const Subgroup& b,
                                                              std::uint64_t bound = 512);

// Entanglement factor of a joint commutator group inside A' x B'.
std::uint64_t delta_entanglement(const SubdirectProduct& c6);

// Assertion backing the coprime-quotient argument: the 6-adic commutator
// order is {2,3}-smooth and the Borel-side commutator order is a p-power.
bool coprime_commutator_triviality(const Subgroup& g6, const Subgroup& hp, residue_t p);

// All subdirect products of A x B with quotient order <= bound, up to
// conjugacy; used by the property suite.
std::vector<SubdirectProduct> enumerate_subdirect_products(const Subgroup& a, const Subgroup& b,
                                                           std::uint64_t bound = 64);

}  // namespace gl2
