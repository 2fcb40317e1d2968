#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "gl2/commutator.hpp"
#include "gl2/curve.hpp"
#include "gl2/subgroup.hpp"

namespace gl2 {

struct RunConfig {
    std::size_t closure_cap = kDefaultClosureCap;
    StabilizationConfig stab;
    unsigned certify_trials = 8;
    bool delta_stability_check = true;
};

enum class NodeColor { Inf, FinMaximal, FinNonmaximal, Unknown };

struct LatticeNode {
    Subgroup group;  // presented at its level (modulus 1 for the full group)
    residue_t group_level = 1;
    std::vector<std::size_t> parents;
    CurveInvariants fiber;  // invariants of X_H x X_K
    CurveKey fiber_key;
    FinitenessVerdict verdict;
    NodeColor color = NodeColor::Unknown;
    std::uint64_t commutator_index6 = 0;  // stabilized; 0 until computed
};

struct Lattice {
    unsigned p = 0;
    std::string k_label;
    std::vector<LatticeNode> nodes;  // node 0 is the full group
    bool has_unknown = false;

    std::vector<std::size_t> inf_nodes() const;
    std::vector<std::size_t> fin_nodes() const;
};

struct ProjectionWhitelist {
    std::vector<Subgroup> two_adic;   // each at its level (modulus 1 = full)
    std::vector<Subgroup> three_adic;
};

// Containment/equality of open groups up to ambient conjugacy, compared at a
// common modulus.
bool classes_equal(const Subgroup& a, const Subgroup& b);
bool class_contained(const Subgroup& a, const Subgroup& b);

// The recursive lattice of 6-adic groups over the p-adic group k: the full
// group is a member; under every member whose fiber curve with X_K has
// infinitely many rational points, the maximal open subgroups passing the
// -I / determinant / projection-whitelist filters are members too.
Lattice build_lattice(unsigned p, const Subgroup& k, const ProjectionWhitelist& wl,
                      const RankOracle& oracle, const RunConfig& cfg = {});

// Colors every finite node and returns the maximal-finite ones.
std::vector<std::size_t> color_lattice(Lattice& lat);

// Stabilized 6-adic commutator indices over the chosen sublattice.
std::set<std::uint64_t> commutator_index_set(Lattice& lat, bool infinite_side,
                                             const RunConfig& cfg = {});

// ---- product grids for p in {2,3} ----

struct GridProduct {
    std::size_t hi = 0, ki = 0;
    CurveInvariants fiber;
    CurveKey key;
    FinitenessVerdict verdict;
    bool maximal_finite = false;
    std::set<std::uint64_t> delta_set;  // populated for infinite products
};

struct GridReport {
    unsigned p = 0;
    std::vector<std::uint64_t> idx2, idx3;  // commutator indices per factor
    std::vector<GridProduct> products;
    std::size_t maximal_finite_count = 0;
    std::size_t infinite_count = 0;
    std::map<std::size_t, std::set<std::uint64_t>> delta_by_k;
    std::set<std::uint64_t> delta_all;
    std::set<std::uint64_t> candidate_indices;
    bool has_unknown = false;
};

GridReport product_grid(unsigned p, const std::vector<Subgroup>& l2, const std::vector<Subgroup>& l3,
                        const RankOracle& oracle, const RunConfig& cfg = {});

// ---- whitelist derivation ----

// All open subgroups of the root (within the ambient's prime support) that
// contain -I, have full determinant, and satisfy the index and level bounds;
// up to ambient conjugacy, each presented at its level.
std::vector<Subgroup> open_subgroup_tree(const Subgroup& root, residue_t ambient,
                                         std::uint64_t index_bound, residue_t level_bound);

struct ClassSpec {
    residue_t level = 1;
    std::uint64_t index = 1;
    std::uint64_t genus = 0;
    unsigned count = 1;
};

// Selects tree members matching the class counts.  exact receives false when
// some class has more candidates than its requested count (ambiguous) or too
// few (derivation failure).
std::vector<Subgroup> match_class_specs(const std::vector<Subgroup>& tree,
                                        const std::vector<ClassSpec>& specs, bool* exact);

}  // namespace gl2
