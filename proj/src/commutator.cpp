#include "gl2/commutator.hpp"

#include <algorithm>
#include <array>
#include <queue>
#include <sstream>

namespace gl2 {

namespace {

// F_l vectors of length 3 describing sl2-kernel elements I + m*A with
// coordinates (A11, A12, A21); A22 is determined by tr A = 0 (mod l).
using KVec = std::array<residue_t, 3>;

struct KernelSpace {
    residue_t l;
    std::vector<KVec> basis;  // echelonized

    // reduce v against the basis; returns true if v was independent (and adds it)
    bool add(KVec v) {
        reduce(v);
        if (v == KVec{0, 0, 0}) return false;
        basis.push_back(v);
        echelonize();
        return true;
    }
    void reduce(KVec& v) const {
        for (const auto& b : basis) {
            unsigned p = pivot(b);
            if (v[p]) {
                residue_t f = residue_t(std::uint64_t(v[p]) * inv_mod(b[p], l) % l);
                for (unsigned i = 0; i < 3; ++i) v[i] = residue_t((v[i] + std::uint64_t(l - f) * b[i]) % l);
            }
        }
    }
    static unsigned pivot(const KVec& b) {
        for (unsigned i = 0; i < 3; ++i)
            if (b[i]) return i;
        return 3;
    }
    void echelonize() {
        std::sort(basis.begin(), basis.end(),
                  [](const KVec& a, const KVec& b) { return pivot(a) < pivot(b); });
        for (std::size_t i = 0; i < basis.size(); ++i) {
            unsigned p = pivot(basis[i]);
            if (p == 3) { basis.resize(i); break; }
            residue_t f = inv_mod(basis[i][p], l);
            for (unsigned k = 0; k < 3; ++k) basis[i][k] = residue_t(std::uint64_t(basis[i][k]) * f % l);
            for (std::size_t j = 0; j < basis.size(); ++j) {
                if (j == i || !basis[j][p]) continue;
                residue_t g = basis[j][p];
                for (unsigned k = 0; k < 3; ++k)
                    basis[j][k] = residue_t((basis[j][k] + std::uint64_t(l - g) * basis[i][k]) % l);
            }
        }
    }
    unsigned rank() const { return unsigned(basis.size()); }
};

}  // namespace

unsigned kernel_intersection_dim(const Subgroup& g, residue_t m, residue_t l,
                                 const ElementList& c_m, std::size_t cap) {
    if (m % l != 0) throw ModulusMismatch("kernel_intersection_dim: l must divide m");
    std::uint64_t big64 = std::uint64_t(m) * l;
    if (big64 > 0xffff) throw ModulusMismatch("kernel_intersection_dim: modulus too large");
    residue_t big = residue_t(big64);

    Subgroup gup = image_at(g, big);
    const auto& tgens = gup.generators();

    auto vec_of = [&](packed_t kx) -> KVec {
        Mat2 x = Mat2::unpack(kx, big);
        auto coord = [&](residue_t entry, residue_t idval) {
            residue_t diff = residue_t((entry + big - idval) % big);
            return residue_t(diff / m % l);
        };
        KVec v{coord(x.a, 1), coord(x.b, 0), coord(x.c, 0)};
        return v;
    };

    // adjoint action of the mod-l images of the generators on kernel coords
    struct AdMat {
        std::array<KVec, 3> col;
    };
    auto ad_of = [&](const Mat2& t) {
        Mat2 tl = mat_reduce(t, l);
        Mat2 tli = mat_inv(tl);
        AdMat ad;
        const std::array<std::array<residue_t, 4>, 3> base{{{1, 0, 0, residue_t(l - 1) % l},
                                                            {0, 1, 0, 0},
                                                            {0, 0, 1, 0}}};
        for (unsigned i = 0; i < 3; ++i) {
            Mat2 a(l, base[i][0], base[i][1], base[i][2], base[i][3]);
            Mat2 c = mat_mul(mat_mul(tl, a), tli);
            ad.col[i] = KVec{c.a, c.b, c.c};
        }
        return ad;
    };
    std::vector<AdMat> ads;
    for (auto& t : tgens) ads.push_back(ad_of(t));

    KernelSpace space{l, {}};
    auto add_with_module_closure = [&](KVec v) {
        if (!space.add(v)) return;
        bool grew = true;
        while (grew) {
            grew = false;
            auto snapshot = space.basis;
            for (auto& b : snapshot) {
                for (auto& ad : ads) {
                    KVec w{0, 0, 0};
                    for (unsigned i = 0; i < 3; ++i)
                        for (unsigned k = 0; k < 3; ++k)
                            w[k] = residue_t((w[k] + std::uint64_t(b[i]) * ad.col[i][k]) % l);
                    if (space.add(w)) grew = true;
                }
            }
        }
    };

    // base commutators of the generators of G(big)
    std::vector<packed_t> base_up, base_shadow;
    {
        PackedSet seen(64);
        for (std::size_t i = 0; i < tgens.size(); ++i)
            for (std::size_t j = i + 1; j < tgens.size(); ++j) {
                Mat2 c = mat_mul(mat_mul(tgens[i], tgens[j]), mat_inv(mat_mul(tgens[j], tgens[i])));
                if (c.is_identity()) continue;
                if (seen.insert(c.pack())) {
                    base_up.push_back(c.pack());
                    base_shadow.push_back(mat_reduce(c, m).pack());
                }
            }
    }

    const std::vector<packed_t>& shadows = c_m.elems;
    auto shadow_index = [&](packed_t s) {
        auto it = std::lower_bound(shadows.begin(), shadows.end(), s);
        if (it == shadows.end() || *it != s)
            throw std::logic_error("kernel_intersection_dim: shadow outside enumerated commutator");
        return std::size_t(it - shadows.begin());
    };

    std::vector<packed_t> lift(shadows.size(), PackedSet::kEmpty);
    std::queue<std::size_t> work;

    auto inv_packed = [&](packed_t v, residue_t mod) { return mat_inv(Mat2::unpack(v, mod)).pack(); };

    auto process = [&](packed_t shadow, packed_t value) {
        std::size_t idx = shadow_index(shadow);
        if (lift[idx] == PackedSet::kEmpty) {
            lift[idx] = value;
            work.push(idx);
            return;
        }
        packed_t delta = packed_mul(inv_packed(lift[idx], big), value, big);
        if (delta == Mat2::identity(big).pack()) return;
        add_with_module_closure(vec_of(delta));
    };

    packed_t idm = Mat2::identity(m).pack();
    std::size_t idx0 = shadow_index(idm);
    lift[idx0] = Mat2::identity(big).pack();
    work.push(idx0);
    for (std::size_t i = 0; i < base_up.size(); ++i) process(base_shadow[i], base_up[i]);

    std::vector<packed_t> t_up, t_up_inv, t_dn, t_dn_inv;
    for (auto& t : tgens) {
        t_up.push_back(t.pack());
        t_up_inv.push_back(mat_inv(t).pack());
        Mat2 r = mat_reduce(t, m);
        t_dn.push_back(r.pack());
        t_dn_inv.push_back(mat_inv(r).pack());
    }

    (void)cap;
    while (!work.empty()) {
        if (space.rank() == 3) break;  // cannot grow further
        std::size_t idx = work.front();
        work.pop();
        packed_t s = shadows[idx];
        packed_t x = lift[idx];
        for (std::size_t i = 0; i < base_up.size(); ++i) {
            process(packed_mul(s, base_shadow[i], m), packed_mul(x, base_up[i], big));
        }
        for (std::size_t i = 0; i < t_up.size(); ++i) {
            packed_t zs = packed_mul(packed_mul(t_dn[i], s, m), t_dn_inv[i], m);
            packed_t zv = packed_mul(packed_mul(t_up[i], x, big), t_up_inv[i], big);
            process(zs, zv);
        }
    }
    return space.rank();
}

namespace {

unsigned ord_at(std::uint64_t n, std::uint64_t p) {
    unsigned e = 0;
    while (n % p == 0) { n /= p; ++e; }
    return e;
}

std::uint64_t pow_u(std::uint64_t b, unsigned e) {
    std::uint64_t r = 1;
    while (e--) r *= b;
    return r;
}

}  // namespace

CommutatorReport commutator_index_padic(const Subgroup& g, residue_t l, const StabilizationConfig& cfg) {
    auto f = Factorization::of(g.modulus());
    for (auto& [p, e] : f.primes) {
        (void)e;
        if (p != l) throw ModulusMismatch("commutator_index_padic: presentation not a power of the prime");
    }
    unsigned maxexp = l == 2 ? cfg.max_exp_2 : l == 3 ? cfg.max_exp_3 : cfg.max_exp_large;
    Subgroup base = at_level(g);
    unsigned j = std::max(ord_at(base.modulus() == 1 ? 1 : base.modulus(), l), 2u);

    CommutatorReport rep;
    rep.base_modulus = g.modulus();
    std::ostringstream log;
    while (j <= maxexp) {
        residue_t m = residue_t(pow_u(l, j));
        Subgroup gm = image_at(base, m);
        auto com = commutator_subgroup(gm, cfg.closure_cap);
        std::uint64_t idx = sl2_order(m) / com.elems.size();
        unsigned dim = kernel_intersection_dim(base, m, l, com.elems, cfg.closure_cap);
        std::uint64_t idx_next = idx * pow_u(l, 3 - dim);
        log << "m=" << m << " index=" << idx << " next=" << idx_next
            << " kernel_dim=" << dim << "; ";
        if (dim == 3) {
            rep.stabilized_modulus = m;
            rep.index_in_sl2 = idx;
            rep.certificate = true;
            rep.commutator_generators = com.group.generators();
            rep.transcript = log.str();
            return rep;
        }
        ++j;
    }
    throw StabilizationFailed("no stabilization for prime " + std::to_string(l) +
                              " within exponent " + std::to_string(maxexp) + " (" + log.str() + ")");
}

CommutatorReport commutator_index_6adic(const Subgroup& g, const StabilizationConfig& cfg) {
    for (auto& [p, e] : Factorization::of(g.modulus()).primes) {
        (void)e;
        if (p != 2 && p != 3) throw ModulusMismatch("commutator_index_6adic: modulus must be 2^a 3^b");
    }
    Subgroup base = at_level(g);
    unsigned a = std::max(ord_at(base.modulus(), 2), 2u);
    unsigned b = std::max(ord_at(base.modulus(), 3), 1u);

    CommutatorReport rep;
    rep.base_modulus = g.modulus();
    std::ostringstream log;
    while (a <= cfg.max_exp_2 && b <= cfg.max_exp_3) {
        residue_t m = residue_t(pow_u(2, a) * pow_u(3, b));
        Subgroup gm = image_at(base, m);
        auto com = commutator_subgroup(gm, cfg.closure_cap);
        std::uint64_t idx = sl2_order(m) / com.elems.size();
        unsigned dim2 = kernel_intersection_dim(base, m, 2, com.elems, cfg.closure_cap);
        unsigned dim3 = kernel_intersection_dim(base, m, 3, com.elems, cfg.closure_cap);
        log << "m=" << m << " index=" << idx << " dim2=" << dim2 << " dim3=" << dim3 << "; ";
        if (dim2 == 3 && dim3 == 3) {
            rep.stabilized_modulus = m;
            rep.index_in_sl2 = idx;
            rep.certificate = true;
            rep.commutator_generators = com.group.generators();
            rep.transcript = log.str();
            return rep;
        }
        if (dim2 < 3) ++a;
        if (dim3 < 3) ++b;
    }
    throw StabilizationFailed("no 6-adic stabilization within (2^" + std::to_string(cfg.max_exp_2) +
                              ", 3^" + std::to_string(cfg.max_exp_3) + ") (" + log.str() + ")");
}

}  // namespace gl2
