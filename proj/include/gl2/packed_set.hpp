#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

#include "gl2/residue.hpp"

namespace gl2 {

// Open-addressing hash set for packed matrices.  The empty slot marker is
// ~0ull, which never encodes a reduced matrix (entries < modulus <= 2^16-1
// would require modulus 2^16).
class PackedSet {
public:
    static constexpr packed_t kEmpty = ~packed_t(0);

    explicit PackedSet(std::size_t expect = 16) { rehash(capacity_for(expect)); }

    bool insert(packed_t v) {
        if ((size_ + 1) * 10 >= cap_ * 7) rehash(cap_ * 2);
        std::size_t i = slot(v);
        while (table_[i] != kEmpty) {
            if (table_[i] == v) return false;
            i = (i + 1) & (cap_ - 1);
        }
        table_[i] = v;
        ++size_;
        return true;
    }

    bool contains(packed_t v) const {
        std::size_t i = slot(v);
        while (table_[i] != kEmpty) {
            if (table_[i] == v) return true;
            i = (i + 1) & (cap_ - 1);
        }
        return false;
    }

    std::size_t size() const { return size_; }

    std::vector<packed_t> sorted() const;

    template <typename F>
    void for_each(F&& f) const {
        for (packed_t v : table_)
            if (v != kEmpty) f(v);
    }

private:
    static std::size_t capacity_for(std::size_t expect) {
        std::size_t c = 16;
        while (c * 7 < expect * 10) c *= 2;
        return c;
    }
    std::size_t slot(packed_t v) const {
        std::uint64_t h = v * 0x9e3779b97f4a7c15ull;
        h ^= h >> 29;
        return std::size_t(h) & (cap_ - 1);
    }
    void rehash(std::size_t ncap);

    std::vector<packed_t> table_;
    std::size_t cap_ = 0;
    std::size_t size_ = 0;
};

// Immutable sorted element list; the representation of enumerated groups.
struct ElementList {
    residue_t modulus = 1;
    std::vector<packed_t> elems;  // sorted ascending

    std::size_t size() const { return elems.size(); }
    bool contains(packed_t v) const;
    std::uint64_t hash() const;  // order-independent content hash
};

}  // namespace gl2
