#pragma once

#include <vector>

#include "gl2/subgroup.hpp"

namespace gl2 {

struct MaximalSubgroup {
    Subgroup group;
    std::uint64_t index = 1;  // index in the input group
};

// All maximal subgroups of the finite group G(modulus), complete up to
// conjugacy in the ambient GL_2(Z/modulus).  Recursion peels one congruence
// step at a time: a maximal subgroup either contains the elementary abelian
// congruence kernel V (and comes from the quotient) or complements an
// irreducible chief factor V/W, found by solving the cocycle equations.
// When preimage_hint is nonzero, G is promised to be the full preimage of its
// image mod preimage_hint; the recursion then never enumerates G itself.
std::vector<MaximalSubgroup> maximal_subgroups_finite(const Subgroup& g, residue_t preimage_hint = 0);

struct MaximalOpenResult {
    std::vector<Subgroup> subgroups;  // presented at a modulus where their level divides it
    bool complete = true;
    std::string notes;
};

// All maximal open subgroups of the open group h0 (full preimage of its
// presentation), up to ambient conjugacy.  The level bound: a maximal open
// subgroup of a group of level dividing N has level dividing N*l for some
// prime l of the ambient, so candidates are collected at the moduli N*l.
// ambient_modulus fixes the prime support (e.g. 6 for GL2(Z_6) work, a prime
// power for one-prime work); h0's level must divide a power of it.  A nonzero
// level_cap drops higher-level candidates before deduplication.
MaximalOpenResult maximal_open_subgroups(const Subgroup& h0, residue_t ambient_modulus,
                                         residue_t level_cap = 0);

// Certification helper: for `trials` random h in H0 \ M, checks <M,h> = H0.
bool certify_maximal(const Subgroup& h0, const Subgroup& m, unsigned trials, std::uint64_t seed = 1);

}  // namespace gl2
