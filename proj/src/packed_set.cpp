#include "gl2/packed_set.hpp"

#include <algorithm>

namespace gl2 {

void PackedSet::rehash(std::size_t ncap) {
    std::vector<packed_t> old;
    old.swap(table_);
    cap_ = ncap < 16 ? 16 : ncap;
    table_.assign(cap_, kEmpty);
    size_ = 0;
    for (packed_t v : old)
        if (v != kEmpty) insert(v);
}

std::vector<packed_t> PackedSet::sorted() const {
    std::vector<packed_t> out;
    out.reserve(size_);
    for (packed_t v : table_)
        if (v != kEmpty) out.push_back(v);
    std::sort(out.begin(), out.end());
    return out;
}

bool ElementList::contains(packed_t v) const {
    return std::binary_search(elems.begin(), elems.end(), v);
}

std::uint64_t ElementList::hash() const {
    std::uint64_t h = 0x243f6a8885a308d3ull ^ (std::uint64_t(modulus) << 32) ^ elems.size();
    for (packed_t v : elems) {
        std::uint64_t x = v * 0x9e3779b97f4a7c15ull;
        x ^= x >> 31;
        x *= 0xbf58476d1ce4e5b9ull;
        x ^= x >> 27;
        h += x;  // commutative mix: content hash independent of any ordering
    }
    return h;
}

}  // namespace gl2
