#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gl2/packed_set.hpp"
#include "gl2/residue.hpp"

namespace gl2 {

struct ClosureTooLarge : std::runtime_error {
    std::size_t partial_count;
    ClosureTooLarge(std::size_t count, const std::string& what)
        : std::runtime_error(what), partial_count(count) {}
};

// Default element cap for closures; every group the computations here touch
// fits well below it.
constexpr std::size_t kDefaultClosureCap = 20'000'000;

// Finite-level descriptor of an open subgroup of GL_2(Z_m).  The descriptor
// always denotes the full preimage of <generators> under reduction mod N, so
// the group and its mod-N image are interchangeable.
class Subgroup {
public:
    Subgroup() : modulus_(1) {}
    Subgroup(residue_t modulus, std::vector<Mat2> gens, std::string label = "");

    Subgroup(const Subgroup& o)
        : modulus_(o.modulus_), gens_(o.gens_), label_(o.label_), cache_(o.snapshot()) {}
    Subgroup& operator=(const Subgroup& o) {
        if (this != &o) {
            modulus_ = o.modulus_;
            gens_ = o.gens_;
            label_ = o.label_;
            auto snap = o.snapshot();
            std::lock_guard<std::mutex> lk(cache_mutex_);
            cache_ = std::move(snap);
        }
        return *this;
    }
    Subgroup(Subgroup&& o) noexcept
        : modulus_(o.modulus_), gens_(std::move(o.gens_)), label_(std::move(o.label_)), cache_(o.snapshot()) {}
    Subgroup& operator=(Subgroup&& o) noexcept {
        if (this != &o) {
            modulus_ = o.modulus_;
            gens_ = std::move(o.gens_);
            label_ = std::move(o.label_);
            auto snap = o.snapshot();
            std::lock_guard<std::mutex> lk(cache_mutex_);
            cache_ = std::move(snap);
        }
        return *this;
    }

    static Subgroup full(residue_t modulus, std::string label = "");    // GL_2(Z/N)
    static Subgroup sl2(residue_t modulus, std::string label = "");
    static Subgroup trivial(residue_t modulus);

    residue_t modulus() const { return modulus_; }
    const std::vector<Mat2>& generators() const { return gens_; }
    const std::string& label() const { return label_; }
    void set_label(std::string l) { label_ = std::move(l); }

    // Exact closure of the generators mod N.  Cached after first computation;
    // concurrent readers either see the finished cache or compute their own.
    const ElementList& elements(std::size_t cap = kDefaultClosureCap) const;

    std::uint64_t order(std::size_t cap = kDefaultClosureCap) const { return elements(cap).size(); }
    std::uint64_t index_in_gl2() const { return gl2_order(modulus_) / order(); }

    bool contains(const Mat2& m) const;
    bool contains_minus_I() const { return contains(Mat2::minus_identity(modulus_)); }
    bool det_image_full() const;
    std::uint64_t det_image_order() const;

    bool contains_subgroup(const Subgroup& h) const;  // same modulus
    bool same_group(const Subgroup& h) const;         // same modulus, equal element sets

    // Content hash of the element set (conjugation-sensitive).
    std::uint64_t element_hash() const { return elements().hash(); }

    Subgroup with_extra_generator(const Mat2& g, std::string label = "") const;

private:
    std::shared_ptr<const ElementList> snapshot() const {
        std::lock_guard<std::mutex> lk(cache_mutex_);
        return cache_;
    }

    residue_t modulus_;
    std::vector<Mat2> gens_;
    std::string label_;

    mutable std::mutex cache_mutex_;
    mutable std::shared_ptr<const ElementList> cache_;
};

// Closure of a set of generators, optionally seeded.  Throws ClosureTooLarge.
ElementList closure(residue_t modulus, const std::vector<Mat2>& gens,
                    const std::vector<packed_t>& seed = {},
                    std::size_t cap = kDefaultClosureCap);

// Generators of the kernel of GL_2(Z/M) -> GL_2(Z/N) for N | M.
std::vector<Mat2> congruence_kernel_generators(residue_t big, residue_t small);

// reduce: image mod M for M | N.  lift_full_preimage: full preimage mod M for
// N | M.  image_at: image of the open group at an arbitrary modulus M whose
// prime support is contained in that of N (goes through lcm(N, M)).
Subgroup reduce(const Subgroup& g, residue_t m);
Subgroup lift_full_preimage(const Subgroup& g, residue_t m);
Subgroup image_at(const Subgroup& g, residue_t m);

// The least divisor M of the presentation modulus with
// lift(reduce(G, M)) = G; equals the level of the open group.
residue_t level(const Subgroup& g);
// Same, with the order at the presentation modulus supplied externally so the
// group itself need not be enumerated.
residue_t level_given_order(const Subgroup& g, std::uint64_t order);
// Re-present the group at its level.
Subgroup at_level(const Subgroup& g);
Subgroup at_level_given_order(const Subgroup& g, std::uint64_t order);

// Commutator subgroup at the same modulus: the normal closure in G of the
// pairwise generator commutators.  Returns generators plus the enumerated
// element list.
struct CommutatorSubgroup {
    Subgroup group;
    ElementList elems;
};
CommutatorSubgroup commutator_subgroup(const Subgroup& g, std::size_t cap = kDefaultClosureCap);

// Normal closure in g of the given elements (all at g's modulus).  When
// closure_gens is non-null it receives a set of plain-subgroup generators of
// the result (the seed plus the conjugates discovered along the way).
ElementList normal_closure(const Subgroup& g, const std::vector<Mat2>& seed,
                           std::size_t cap = kDefaultClosureCap,
                           std::vector<Mat2>* closure_gens = nullptr);

// Conjugated subgroup c g c^{-1}.
Subgroup conjugate_subgroup(const Subgroup& g, const Mat2& c);

// Intersection with SL2 via det-kernel enumeration (needs elements).
ElementList sl2_part(const Subgroup& g);

// Greedy small generating set for an enumerated subgroup.
std::vector<Mat2> greedy_generators(residue_t modulus, const std::vector<packed_t>& elems);
Subgroup subgroup_from_elements(residue_t modulus, const std::vector<packed_t>& elems,
                                std::string label = "");

}  // namespace gl2
