#pragma once

#include <string>

#include "gl2/subgroup.hpp"

namespace gl2 {

struct StabilizationFailed : std::runtime_error {
    explicit StabilizationFailed(const std::string& what) : std::runtime_error(what) {}
};

struct CommutatorReport {
    residue_t base_modulus = 1;        // modulus of the input presentation
    residue_t stabilized_modulus = 1;  // modulus at which the index was certified
    std::uint64_t index_in_sl2 = 1;    // [SL2(Z_m) : G']
    bool certificate = false;          // level certificate held at stabilized_modulus
    std::vector<Mat2> commutator_generators;
    std::string transcript;
};

struct StabilizationConfig {
    unsigned max_exp_2 = 7;
    unsigned max_exp_3 = 5;
    unsigned max_exp_large = 4;  // primes >= 5
    std::size_t closure_cap = kDefaultClosureCap;
};

// Dimension over F_l of C(m*l) cap Ker(SL2(Z/m*l) -> SL2(Z/m)), where C is the
// commutator subgroup of the open group g at the respective moduli and c_m is
// that commutator enumerated at modulus m.  Requires l | m.  Dimension 3 means
// the commutator's level divides m at the prime l.
unsigned kernel_intersection_dim(const Subgroup& g, residue_t m, residue_t l,
                                 const ElementList& c_m, std::size_t cap = kDefaultClosureCap);

// Stabilized l-adic commutator index of a group presented at a power of l.
CommutatorReport commutator_index_padic(const Subgroup& g, residue_t l,
                                        const StabilizationConfig& cfg = {});

// Stabilized commutator index inside SL2(Z_6) of a group presented at a
// modulus of the form 2^a 3^b, with joint certificates at both primes.
CommutatorReport commutator_index_6adic(const Subgroup& g, const StabilizationConfig& cfg = {});

}  // namespace gl2
