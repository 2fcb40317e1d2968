#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gl2/commutator.hpp"
#include "gl2/subgroup.hpp"

namespace gl2 {

struct PrimeCongruenceViolation : std::runtime_error {
    explicit PrimeCongruenceViolation(const std::string& what) : std::runtime_error(what) {}
};

// The conjectured full set of adelic indices and the per-isogeny-degree sets.
class IndexTables {
public:
    static const std::vector<std::uint64_t>& all();                       // 48 values
    static const std::vector<std::uint64_t>& for_prime(unsigned p);      // I_p
    static const std::vector<unsigned>& primes();                        // {2,3,5,7,11,13,17,37}
    static bool in_Ip(std::uint64_t index, unsigned p);
    static bool in_conjectured_set(std::uint64_t index);
    // cross-checks run on first use: each I_p is ascending and contained in
    // the full set, which has exactly 48 ascending values
    static void self_check();
};

// m0 = lcm(2^3 3^3, prod_{l | m} l^(2 ord_l(m) + 1)); requires every prime
// divisor of m to satisfy l != +-1 mod 5.
std::uint64_t m0(std::uint64_t m);

struct M0Certificate {
    std::uint64_t m = 1;
    std::uint64_t m0_value = 1;
    std::vector<unsigned> condition1_primes;  // primes checked for SL2 containment
    bool condition1 = false;
    bool condition2 = false;  // H(mod m0)' == G(mod m0)'
    bool equal = false;
    std::string transcript;
};

// Finite-level commutator equality test for open H <= G, m a multiple of the
// level of G.
M0Certificate commutators_equal(const Subgroup& h, const Subgroup& g, std::uint64_t m,
                                const StabilizationConfig& cfg = {});

// [GL2(Zhat):G_E] = [SL2(Z_6):G6'] * [SL2(Z_p):Gp'] for p in {5,7,13} with the
// p-side inside a Borel preimage.
struct AdelicIndexReport {
    std::uint64_t index = 0;
    CommutatorReport factor6;
    CommutatorReport factorp;
    std::uint64_t delta = 1;
    unsigned p = 0;
    bool in_table = false;
};

AdelicIndexReport adelic_index_isogeny(const Subgroup& g6, const Subgroup& gp, unsigned p,
                                       const StabilizationConfig& cfg = {});
// p in {2,3}: the adelic index equals the 6-adic commutator index.
AdelicIndexReport adelic_index_23(const Subgroup& g6, unsigned p, const StabilizationConfig& cfg = {});
// product form with an explicit entanglement factor
std::uint64_t adelic_index_with_delta(std::uint64_t index2, std::uint64_t index3, std::uint64_t delta);

}  // namespace gl2
