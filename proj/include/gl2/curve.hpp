#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gl2/subgroup.hpp"

namespace gl2 {

struct NotAModularCurveOverQ : std::runtime_error {
    explicit NotAModularCurveOverQ(const std::string& what) : std::runtime_error(what) {}
};

struct CurveInvariants {
    std::uint64_t psl2_index = 1;  // d
    std::uint64_t epsilon2 = 0;
    std::uint64_t epsilon3 = 0;
    std::uint64_t cusp_count = 0;
    std::uint64_t rational_cusp_count = 0;
    std::uint64_t genus = 0;

    // 12(g-1) + 3 e2 + 4 e3 + 6 cusps = d, asserted on every construction.
    void validate() const;
};

// Right-coset action of SL2(Z/N) on (+-G cap SL2)\SL2(Z/N), with the
// permutations of the standard elliptic and parabolic elements and of the
// diagonal twists that drive the Galois action on cusps.
struct CosetAction {
    residue_t modulus = 1;
    std::uint32_t degree = 1;
    std::vector<std::uint32_t> perm_T;  // [[1,1],[0,1]]
    std::vector<std::uint32_t> perm_S;  // [[0,-1],[1,0]]
    std::vector<std::uint32_t> perm_R;  // [[0,-1],[1,-1]]
    std::vector<std::vector<std::uint32_t>> twists;

    static CosetAction of(const Subgroup& g, std::size_t cap = kDefaultClosureCap);
    // Pair action for groups of coprime levels (the fiber product curve).
    static CosetAction product(const CosetAction& a, const CosetAction& b);
};

CurveInvariants invariants_from_action(const CosetAction& act);

// Invariants of X_G.  Computed on <G, -I>; requires full determinant image.
CurveInvariants curve_invariants(const Subgroup& g);

// Invariants of the fiber product X_H x X_K for groups with coprime levels.
CurveInvariants fiber_invariants(const Subgroup& h, const Subgroup& k);

// (trace, det) histogram of the mod-level element set; the conjugation
// invariant used in oracle keys.  Indexed by trace * N + det.
std::vector<std::uint32_t> trace_det_histogram(const Subgroup& g);

// Conjugation-invariant identity of the curve X_G used as the oracle key.
struct CurveKey {
    std::uint64_t level = 1;
    std::uint64_t index = 1;
    std::uint64_t genus = 0;
    std::uint64_t inv_hash = 0;
    std::string str() const;
};

CurveKey curve_key(const Subgroup& g);
// Key of the fiber product curve, computed without enumerating the product.
CurveKey fiber_curve_key(const Subgroup& h, const Subgroup& k);

enum class Finiteness { Finite, Infinite, Unknown };

struct FinitenessVerdict {
    Finiteness value = Finiteness::Unknown;
    std::string provenance;  // "genus>=2" | "oracle:<note>" | "none"
};

// External rank data for genus <= 1 curves, keyed by CurveKey::str().
class RankOracle {
public:
    void add(const std::string& key, Finiteness f, const std::string& note);
    std::optional<std::pair<Finiteness, std::string>> lookup(const std::string& key) const;
    std::size_t size() const { return entries_.size(); }

    static RankOracle load_file(const std::string& path);
    void save_file(const std::string& path) const;
    const std::map<std::string, std::pair<Finiteness, std::string>>& entries() const { return entries_; }

private:
    std::map<std::string, std::pair<Finiteness, std::string>> entries_;
};

// genus >= 2 -> Finite; otherwise oracle lookup; missing entry -> Unknown.
FinitenessVerdict finiteness(const CurveKey& key, const CurveInvariants& inv, const RankOracle& oracle);

}  // namespace gl2
