#include "gl2/constructions.hpp"

#include <algorithm>
#include <sstream>

namespace gl2 {

const std::vector<unsigned>& IsogenyDegreeTable::degrees() {
    static const std::vector<unsigned> t{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 15, 16, 17, 18, 21, 25, 37};
    return t;
}

const std::vector<unsigned>& IsogenyDegreeTable::prime_degrees() {
    static const std::vector<unsigned> t{2, 3, 5, 7, 11, 13, 17, 37};
    return t;
}

bool IsogenyDegreeTable::admissible(unsigned n) {
    const auto& t = degrees();
    return std::find(t.begin(), t.end(), n) != t.end();
}

bool IsogenyDegreeTable::admissible_prime(unsigned p) {
    const auto& t = prime_degrees();
    return std::find(t.begin(), t.end(), p) != t.end();
}

namespace {

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t e, std::uint64_t q) {
    std::uint64_t acc = 1;
    base %= q;
    while (e) {
        if (e & 1) acc = acc * base % q;
        base = base * base % q;
        e >>= 1;
    }
    return acc;
}

std::vector<residue_t> unit_group_generators(residue_t q, residue_t p) {
    std::vector<residue_t> out;
    if (p == 2) {
        if (q >= 4) out.push_back(q - 1);
        if (q >= 8) out.push_back(3);
    } else {
        std::uint64_t phi = euler_phi(q);
        for (residue_t u = 2; u < q; ++u) {
            if (!is_unit_mod(u, q)) continue;
            bool gen = true;
            for (auto& [r, re] : Factorization::of(phi).primes) {
                (void)re;
                if (pow_mod(u, phi / r, q) == 1) { gen = false; break; }
            }
            if (gen) { out.push_back(u); break; }
        }
    }
    return out;
}

}  // namespace

Subgroup borel(residue_t n) {
    if (n < 2) throw Unsupported("borel: n >= 2 required");
    std::vector<Mat2> gens;
    gens.push_back(Mat2(n, 1, 1, 0, 1));
    auto fn = Factorization::of(n);
    for (auto& [p, e] : fn.primes) {
        (void)e;
        residue_t q = residue_t(fn.prime_power(p));
        residue_t rest = residue_t(n / q);
        for (residue_t u : unit_group_generators(q, residue_t(p))) {
            Mat2 d1(q, u, 0, 0, 1), d2(q, 1, 0, 0, u);
            if (rest == 1) {
                gens.push_back(d1);
                gens.push_back(d2);
            } else {
                gens.push_back(crt_join({d1, Mat2::identity(rest)}));
                gens.push_back(crt_join({d2, Mat2::identity(rest)}));
            }
        }
    }
    return Subgroup(n, std::move(gens), "borel:" + std::to_string(n));
}

Subgroup cartan(residue_t n, CartanKind kind) {
    if (n == 2 || n % 2 == 0) throw Unsupported("cartan: odd prime required");
    if (kind == CartanKind::Split) {
        std::vector<Mat2> gens;
        for (residue_t u : unit_group_generators(n, n)) {
            gens.push_back(Mat2(n, u, 0, 0, 1));
            gens.push_back(Mat2(n, 1, 0, 0, u));
        }
        return Subgroup(n, std::move(gens), "csp:" + std::to_string(n));
    }
    // least positive quadratic non-residue mod n
    residue_t eps = 0;
    for (residue_t x = 2; x < n; ++x) {
        bool qr = false;
        for (residue_t y = 1; y < n; ++y)
            if (std::uint64_t(y) * y % n == x) { qr = true; break; }
        if (!qr) { eps = x; break; }
    }
    if (eps == 0) throw ConstructionFailed("cartan: no non-residue found mod " + std::to_string(n));
    // find (a, b) with matrix [[a, eps*b],[b, a]] of order n^2 - 1
    for (residue_t a = 0; a < n; ++a) {
        for (residue_t b = 1; b < n; ++b) {
            Mat2 m(n, a, std::int64_t(eps) * b, b, a);
            if (!m.invertible()) continue;
            if (mat_order(m) == n * n - 1)
                return Subgroup(n, {m}, "cns:" + std::to_string(n));
        }
    }
    throw ConstructionFailed("cartan: no generator of the nonsplit torus mod " + std::to_string(n));
}

Subgroup cartan_normalizer(residue_t n, CartanKind kind) {
    Subgroup c = cartan(n, kind);
    Mat2 invol = (kind == CartanKind::Split) ? Mat2(n, 0, 1, 1, 0) : Mat2(n, 1, 0, 0, -1);
    auto gens = c.generators();
    gens.push_back(invol);
    std::string tag = (kind == CartanKind::Split) ? "csp+" : "cns+";
    return Subgroup(n, std::move(gens), tag + ":" + std::to_string(n));
}

Subgroup s4_normalizer(residue_t l) {
    if (l != 5 && l != 13) throw Unsupported("s4_normalizer: l in {5,13} required");
    // Klein four-group in PGL2 spanned by diag(1,-1) and the swap; its
    // normalizer in PGL2(F_l) is the S4 (l > 3), so collect all g whose
    // conjugation permutes the three involution classes modulo scalars.
    Mat2 d(l, 1, 0, 0, -1), w(l, 0, 1, 1, 0), dw = mat_mul(d, w);
    auto scalar_multiple = [&](const Mat2& x, const Mat2& y) {
        for (residue_t s = 1; s < l; ++s) {
            if (x.a == s * y.a % l && x.b == s * y.b % l && x.c == s * y.c % l && x.d == s * y.d % l)
                return true;
        }
        return false;
    };
    auto in_v4_class = [&](const Mat2& x) {
        return scalar_multiple(x, d) || scalar_multiple(x, w) || scalar_multiple(x, dw);
    };
    std::vector<packed_t> members;
    for (residue_t a = 0; a < l; ++a)
        for (residue_t b = 0; b < l; ++b)
            for (residue_t c = 0; c < l; ++c)
                for (residue_t dd = 0; dd < l; ++dd) {
                    Mat2 g(l, a, b, c, dd);
                    if (!g.invertible()) continue;
                    Mat2 gi = mat_inv(g);
                    if (in_v4_class(mat_mul(mat_mul(g, d), gi)) &&
                        in_v4_class(mat_mul(mat_mul(g, w), gi)))
                        members.push_back(g.pack());
                }
    std::sort(members.begin(), members.end());
    if (members.size() != 24u * (l - 1))
        throw ConstructionFailed("s4_normalizer: normalizer has order " + std::to_string(members.size()));
    Subgroup s = subgroup_from_elements(l, members, "s4:" + std::to_string(l));
    return s;
}

std::optional<IsogenyWitness> rational_isogeny_test(const Subgroup& g, residue_t n) {
    if (g.modulus() % n != 0) throw ModulusMismatch("rational_isogeny_test: n does not divide modulus");
    Subgroup gn = (g.modulus() == n) ? g : reduce(g, n);

    // canonical representatives of cyclic order-n submodules: points of order n
    // up to unit scaling, keyed by the set of unit multiples
    std::vector<std::pair<residue_t, residue_t>> reps;
    std::vector<bool> taken(std::size_t(n) * n, false);
    for (residue_t u = 0; u < n; ++u) {
        for (residue_t v = 0; v < n; ++v) {
            if (gcd_u64(gcd_u64(u, v), n) != 1) continue;  // not of exact order n
            if (taken[std::size_t(u) * n + v]) continue;
            reps.emplace_back(u, v);
            for (residue_t s = 1; s < n; ++s) {
                if (!is_unit_mod(s, n)) continue;
                taken[std::size_t(std::uint64_t(u) * s % n) * n + std::uint64_t(v) * s % n] = true;
            }
        }
    }

    for (auto& [u, v] : reps) {
        bool stable = true;
        std::ostringstream log;
        for (auto& gen : gn.generators()) {
            residue_t x = residue_t((std::uint64_t(gen.a) * u + std::uint64_t(gen.b) * v) % n);
            residue_t y = residue_t((std::uint64_t(gen.c) * u + std::uint64_t(gen.d) * v) % n);
            bool found = false;
            for (residue_t k = 0; k < n && !found; ++k)
                if (std::uint64_t(k) * u % n == x && std::uint64_t(k) * v % n == y) {
                    log << gen.str() << " -> k=" << k << "; ";
                    found = true;
                }
            if (!found) { stable = false; break; }
        }
        if (stable) {
            IsogenyWitness wit;
            wit.degree = n;
            wit.u = u;
            wit.v = v;
            wit.transcript = log.str();
            return wit;
        }
    }
    return std::nullopt;
}

Subgroup adjoin_minus_I(const Subgroup& g) {
    Mat2 mi = Mat2::minus_identity(g.modulus());
    if (g.contains(mi)) return g;
    return g.with_extra_generator(mi, g.label());
}

std::vector<Subgroup> twist_family(const Subgroup& g, residue_t n) {
    if (n <= 2) throw Unsupported("twist_family: n > 2 required");
    Subgroup ghat = adjoin_minus_I(image_at(g, n));
    const auto& elems = ghat.elements();

    // D = normal closure of generator commutators and squares; Ghat/D is an
    // elementary abelian 2-group
    std::vector<Mat2> seed;
    const auto& gens = ghat.generators();
    for (std::size_t i = 0; i < gens.size(); ++i) {
        seed.push_back(mat_mul(gens[i], gens[i]));
        for (std::size_t j = i + 1; j < gens.size(); ++j)
            seed.push_back(mat_mul(mat_mul(gens[i], gens[j]), mat_inv(mat_mul(gens[j], gens[i]))));
    }
    ElementList dset = normal_closure(ghat, seed);

    // coset vectors over F2: BFS assigning each element a vector in the
    // quotient, with generator images as (possibly dependent) spanning bits
    std::size_t q = elems.size() / dset.size();
    std::vector<Subgroup> family{ghat};
    if (q == 1) return family;

    // identify cosets by their minimal element
    auto coset_key = [&](packed_t x) {
        packed_t best = ~packed_t(0);
        for (packed_t dd : dset.elems) {
            packed_t y = packed_mul(x, dd, ghat.modulus());
            if (y < best) best = y;
        }
        return best;
    };
    std::vector<packed_t> coset_of(elems.size());
    std::vector<packed_t> keys;
    for (std::size_t i = 0; i < elems.size(); ++i) coset_of[i] = coset_key(elems.elems[i]);
    keys = coset_of;
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    // group structure on cosets (an F2 vector space)
    auto key_index = [&](packed_t k) {
        return std::size_t(std::lower_bound(keys.begin(), keys.end(), k) - keys.begin());
    };
    std::size_t m = keys.size();
    std::vector<std::vector<std::size_t>> mul(m, std::vector<std::size_t>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            mul[i][j] = key_index(coset_key(packed_mul(keys[i], keys[j], ghat.modulus())));

    // enumerate index-2 subgroups of the quotient: kernels of surjections to
    // {+-1}; characters correspond to subsets closed under the group law
    std::size_t id = key_index(coset_key(Mat2::identity(ghat.modulus()).pack()));
    if (m > 20) throw ClosureTooLarge(m, "twist_family: quotient too large");
    std::vector<std::vector<int>> characters;
    for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << m); ++mask) {
        std::vector<int> chi(m);
        for (std::size_t i = 0; i < m; ++i) chi[i] = (mask >> i) & 1 ? -1 : 1;
        if (chi[id] != 1) continue;
        bool hom = true;
        for (std::size_t i = 0; i < m && hom; ++i)
            for (std::size_t j = 0; j < m && hom; ++j)
                if (chi[mul[i][j]] != chi[i] * chi[j]) hom = false;
        bool onto = std::find(chi.begin(), chi.end(), -1) != chi.end();
        if (hom && onto) characters.push_back(chi);
    }

    std::size_t mi_idx = key_index(coset_key(Mat2::minus_identity(ghat.modulus()).pack()));
    for (auto& chi : characters) {
        if (chi[mi_idx] != -1) continue;  // must not contain -I
        std::vector<packed_t> kept;
        for (std::size_t i = 0; i < elems.size(); ++i)
            if (chi[key_index(coset_of[i])] == 1) kept.push_back(elems.elems[i]);
        family.push_back(subgroup_from_elements(ghat.modulus(), kept,
                                                ghat.label() + "#twist" + std::to_string(family.size())));
    }
    return family;
}

}  // namespace gl2
