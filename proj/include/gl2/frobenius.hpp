#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gl2/io.hpp"
#include "gl2/subgroup.hpp"

namespace gl2 {

struct BadReductionAt : std::runtime_error {
    std::uint64_t prime;
    explicit BadReductionAt(std::uint64_t q)
        : std::runtime_error("bad reduction at " + std::to_string(q)), prime(q) {}
};

struct VerificationFailed : std::runtime_error {
    explicit VerificationFailed(const std::string& what) : std::runtime_error(what) {}
};

struct FrobeniusSignature {
    std::uint64_t q = 0;   // good prime
    std::int64_t aq = 0;   // trace of Frobenius
    residue_t n = 1;       // modulus
    residue_t trace_mod = 0;
    residue_t det_mod = 0;  // q mod n
};

// discriminant of the Weierstrass model (exact, 128-bit)
__int128 discriminant(const CurveFixture& e);

// a_q = q + 1 - #E(F_q) by direct point counting; q must be an odd prime of
// good reduction with q <= 100000.
std::int64_t ap(const CurveFixture& e, std::uint64_t q);

FrobeniusSignature signature(const CurveFixture& e, std::uint64_t q, residue_t n);

// first `count` good primes above 3
std::vector<std::uint64_t> good_primes(const CurveFixture& e, std::size_t count);

// the set of (trace, det) pairs over the group's elements
std::set<std::uint32_t> signature_set(const Subgroup& g);
inline std::uint32_t pack_signature(residue_t tr, residue_t det, residue_t n) {
    return std::uint32_t(tr) * std::uint32_t(n) + det;
}

struct ConsistencyResult {
    bool consistent = true;
    std::uint64_t witness_prime = 0;  // rigorous non-containment certificate
};

// true iff every sampled signature occurs in G; a failure witness refutes
// containment of the image in (any conjugate of) G.
ConsistencyResult consistent_with(const CurveFixture& e, const Subgroup& g,
                                  const std::vector<std::uint64_t>& primes);

// Dickson-style evidence that the mod-l image is all of GL2(F_l): sampled
// signatures must escape the Borel/split-normalizer class, the nonsplit-
// normalizer class, and the exceptional class, and the sampled determinants
// must generate the units.
bool mod_ell_surjective_evidence(const CurveFixture& e, residue_t ell,
                                 const std::vector<std::uint64_t>& primes);

enum class RowStatus { Pinned, ConsistentUnpinned };

struct AppendixRowReport {
    std::string label;
    unsigned p = 0;
    std::uint64_t claimed_index = 0;
    RowStatus status = RowStatus::ConsistentUnpinned;
    std::uint64_t pinned_index = 0;  // when status == Pinned
    std::vector<std::string> notes;
};

struct AppendixReport {
    std::vector<AppendixRowReport> rows;
    std::size_t pinned = 0;
    std::size_t consistent = 0;
};

// catalog: per isogeny degree, the admissible p-adic images (for the pinned
// rows the index check requires every surviving entry to share one
// commutator index)
AppendixReport verify_appendix(const std::vector<CurveFixture>& fixtures,
                               const std::map<unsigned, std::vector<Subgroup>>& catalog,
                               std::size_t prime_budget = 50);

}  // namespace gl2
