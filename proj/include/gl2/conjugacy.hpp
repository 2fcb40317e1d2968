#pragma once

#include <optional>

#include "gl2/subgroup.hpp"

namespace gl2 {

// Witness c in GL_2(Z/N) with c A c^{-1} = B, or definitive absence.  The
// search fixes a well-chosen generator of A, solves the linear transporter
// equations per CRT component, and verifies candidates on the remaining
// generators; exhausting the candidate space decides non-conjugacy.
std::optional<Mat2> conjugacy_witness(const Subgroup& a, const Subgroup& b);
bool is_conjugate(const Subgroup& a, const Subgroup& b);

// Witness c with c A c^{-1} a subgroup of B.
std::optional<Mat2> conjugate_into_witness(const Subgroup& a, const Subgroup& b);
bool conjugate_subgroup_of(const Subgroup& a, const Subgroup& b);

}  // namespace gl2
