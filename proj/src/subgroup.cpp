#include "gl2/subgroup.hpp"

#include <algorithm>
#include <numeric>

namespace gl2 {

Subgroup::Subgroup(residue_t modulus, std::vector<Mat2> gens, std::string label)
    : modulus_(modulus), gens_(std::move(gens)), label_(std::move(label)) {
    for (auto& g : gens_) {
        if (g.n != modulus_) throw ModulusMismatch("generator modulus " + std::to_string(g.n) +
                                                   " in group mod " + std::to_string(modulus_));
        if (!g.invertible()) throw NotInGL2("generator " + g.str() + " not invertible mod " +
                                            std::to_string(modulus_));
    }
}

Subgroup Subgroup::full(residue_t n, std::string label) {
    if (n == 1) return Subgroup(1, {}, std::move(label));
    std::vector<Mat2> gens;
    gens.push_back(Mat2(n, 1, 1, 0, 1));
    gens.push_back(Mat2(n, 1, 0, 1, 1));
    // determinant generators: diag(u, 1) with u generating (Z/q)^x at each
    // prime power, embedded as 1 at the other prime components
    auto fn = Factorization::of(n);
    for (auto& [p, e] : fn.primes) {
        (void)e;
        residue_t q = residue_t(fn.prime_power(p));
        std::vector<residue_t> local;
        if (p == 2) {
            if (q >= 4) local.push_back(q - 1);
            if (q >= 8) local.push_back(3);
        } else {
            std::uint64_t phi = euler_phi(q);
            for (residue_t u = 2; u < q; ++u) {
                if (!is_unit_mod(u, q)) continue;
                bool gen = true;
                for (auto& [r, re] : Factorization::of(phi).primes) {
                    (void)re;
                    if (mat_pow(Mat2(q, u, 0, 0, 1), phi / r).is_identity()) { gen = false; break; }
                }
                if (gen) { local.push_back(u); break; }
            }
        }
        residue_t rest = residue_t(n / q);
        for (residue_t u : local) {
            if (rest == 1) {
                gens.push_back(Mat2(n, u, 0, 0, 1));
            } else {
                gens.push_back(crt_join({Mat2(q, u, 0, 0, 1), Mat2::identity(rest)}));
            }
        }
    }
    return Subgroup(n, std::move(gens), std::move(label));
}

Subgroup Subgroup::sl2(residue_t n, std::string label) {
    if (n == 1) return Subgroup(1, {}, std::move(label));
    return Subgroup(n, {Mat2(n, 1, 1, 0, 1), Mat2(n, 1, 0, 1, 1)}, std::move(label));
}

Subgroup Subgroup::trivial(residue_t n) { return Subgroup(n, {}, ""); }

ElementList closure(residue_t modulus, const std::vector<Mat2>& gens,
                    const std::vector<packed_t>& seed, std::size_t cap) {
    std::vector<packed_t> pg;
    pg.reserve(gens.size());
    for (auto& g : gens) pg.push_back(g.pack());

    PackedSet set(std::max<std::size_t>(64, seed.size() * 2));
    std::vector<packed_t> frontier;
    packed_t id = Mat2::identity(modulus).pack();
    set.insert(id);
    frontier.push_back(id);
    for (packed_t s : seed)
        if (set.insert(s)) frontier.push_back(s);

    std::vector<packed_t> next;
    while (!frontier.empty()) {
        next.clear();
        for (packed_t x : frontier) {
            for (packed_t g : pg) {
                packed_t y = packed_mul(x, g, modulus);
                if (set.insert(y)) {
                    next.push_back(y);
                    if (set.size() > cap)
                        throw ClosureTooLarge(set.size(), "closure exceeded cap of " + std::to_string(cap));
                }
            }
        }
        frontier.swap(next);
    }
    ElementList out;
    out.modulus = modulus;
    out.elems = set.sorted();
    return out;
}

const ElementList& Subgroup::elements(std::size_t cap) const {
    {
        std::lock_guard<std::mutex> lk(cache_mutex_);
        if (cache_) return *cache_;
    }
    auto fresh = std::make_shared<const ElementList>(closure(modulus_, gens_, {}, cap));
    std::lock_guard<std::mutex> lk(cache_mutex_);
    if (!cache_) cache_ = std::move(fresh);
    return *cache_;
}

bool Subgroup::contains(const Mat2& m) const {
    if (m.n != modulus_) throw ModulusMismatch("contains: modulus mismatch");
    return elements().contains(m.pack());
}

std::uint64_t Subgroup::det_image_order() const {
    // subgroup of (Z/N)^x generated by the generator determinants
    if (modulus_ == 1) return 1;
    std::vector<residue_t> dets;
    for (auto& g : gens_) dets.push_back(g.det());
    std::vector<bool> seen(modulus_, false);
    std::vector<residue_t> stack{1 % modulus_};
    seen[1 % modulus_] = true;
    std::size_t count = 0;
    while (!stack.empty()) {
        residue_t x = stack.back();
        stack.pop_back();
        ++count;
        for (residue_t d : dets) {
            residue_t y = residue_t(std::uint64_t(x) * d % modulus_);
            if (!seen[y]) { seen[y] = true; stack.push_back(y); }
        }
    }
    return count;
}

bool Subgroup::det_image_full() const { return det_image_order() == euler_phi(modulus_); }

bool Subgroup::contains_subgroup(const Subgroup& h) const {
    if (h.modulus() != modulus_) throw ModulusMismatch("contains_subgroup: modulus mismatch");
    const auto& mine = elements();
    for (auto& g : h.generators())
        if (!mine.contains(g.pack())) return false;
    return true;
}

bool Subgroup::same_group(const Subgroup& h) const {
    if (h.modulus() != modulus_) return false;
    const auto& a = elements();
    const auto& b = h.elements();
    return a.elems == b.elems;
}

Subgroup Subgroup::with_extra_generator(const Mat2& g, std::string label) const {
    auto gens = gens_;
    gens.push_back(g);
    return Subgroup(modulus_, std::move(gens), std::move(label));
}

std::vector<Mat2> congruence_kernel_generators(residue_t big, residue_t small) {
    if (big % small != 0) throw ModulusMismatch("kernel: " + std::to_string(small) + " does not divide " + std::to_string(big));
    std::vector<Mat2> gens;
    if (big == small) return gens;
    auto fb = Factorization::of(big);
    for (auto& [p, e] : fb.primes) {
        residue_t q = residue_t(fb.prime_power(p));
        residue_t q0 = residue_t(Factorization::of(small).prime_power(p));
        if (q == q0) continue;
        std::uint64_t rest = big / q;
        // CRT helper: component x mod q, identity elsewhere
        auto embed = [&](const Mat2& local) {
            if (rest == 1) return local;
            std::vector<Mat2> parts;
            parts.push_back(local);
            parts.push_back(Mat2::identity(residue_t(rest)));
            return crt_join(parts);
        };
        if (q0 == 1) {
            // whole GL2(Z/q) component
            Subgroup fullq = Subgroup::full(q);
            for (auto& g : fullq.generators()) gens.push_back(embed(g));
        } else {
            // {I + q0*E_ij} generate the congruence kernel mod q; the diagonal
            // pieces need -1 as well when q0 = 2 since 1+2Z/2^e is not cyclic
            gens.push_back(embed(Mat2(q, 1 + q0, 0, 0, 1)));
            gens.push_back(embed(Mat2(q, 1, q0, 0, 1)));
            gens.push_back(embed(Mat2(q, 1, 0, q0, 1)));
            gens.push_back(embed(Mat2(q, 1, 0, 0, 1 + q0)));
            if (p == 2 && q0 == 2 && q >= 8) {
                gens.push_back(embed(Mat2(q, -1, 0, 0, 1)));
                gens.push_back(embed(Mat2(q, 1, 0, 0, -1)));
            }
        }
    }
    return gens;
}

Subgroup reduce(const Subgroup& g, residue_t m) {
    if (g.modulus() % m != 0) throw ModulusMismatch("reduce: target does not divide modulus");
    std::vector<Mat2> gens;
    for (auto& x : g.generators()) {
        Mat2 r = mat_reduce(x, m);
        if (!r.is_identity()) gens.push_back(r);
    }
    return Subgroup(m, std::move(gens), g.label());
}

Subgroup lift_full_preimage(const Subgroup& g, residue_t m) {
    residue_t n = g.modulus();
    if (m % n != 0) throw ModulusMismatch("lift: modulus does not divide target");
    std::vector<Mat2> gens;
    auto fm = Factorization::of(m);
    for (auto& x : g.generators()) {
        // entrywise lift at primes shared with n, identity component at new primes
        std::vector<Mat2> parts;
        for (auto& [p, e] : fm.primes) {
            residue_t q = residue_t(fm.prime_power(p));
            if (n % p == 0)
                parts.push_back(Mat2(q, x.a, x.b, x.c, x.d));
            else
                parts.push_back(Mat2::identity(q));
        }
        gens.push_back(crt_join(parts));
    }
    for (auto& k : congruence_kernel_generators(m, n)) gens.push_back(k);
    return Subgroup(m, std::move(gens), g.label());
}

Subgroup image_at(const Subgroup& g, residue_t m) {
    residue_t n = g.modulus();
    std::uint64_t l = std::uint64_t(n) / gcd_u64(n, m) * m;
    if (l > 0xffff) throw ModulusMismatch("image_at: lcm " + std::to_string(l) + " too large");
    if (l == n) {
        if (m == n) return g;
        return reduce(g, m);
    }
    return reduce(lift_full_preimage(g, residue_t(l)), m);
}

residue_t level_given_order(const Subgroup& g, std::uint64_t order_n) {
    residue_t n = g.modulus();
    if (n == 1) return 1;
    residue_t cur = n;
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& [p, e] : Factorization::of(cur).primes) {
            (void)e;
            residue_t next = residue_t(cur / p);
            // G is the preimage of its image mod next iff the orders match
            std::uint64_t kernel = gl2_order(n) / gl2_order(next);
            std::uint64_t ord_next = (next == 1) ? 1 : reduce(g, next).order();
            if (ord_next * kernel == order_n) {
                cur = next;
                changed = true;
                break;
            }
        }
        if (cur == 1) break;
    }
    return cur;
}

residue_t level(const Subgroup& g) {
    if (g.modulus() == 1) return 1;
    return level_given_order(g, g.order());
}

Subgroup at_level(const Subgroup& g) {
    residue_t l = level(g);
    if (l == g.modulus()) return g;
    Subgroup r = reduce(g, l);
    r.set_label(g.label());
    return r;
}

Subgroup at_level_given_order(const Subgroup& g, std::uint64_t order) {
    residue_t l = level_given_order(g, order);
    if (l == g.modulus()) return g;
    Subgroup r = reduce(g, l);
    r.set_label(g.label());
    return r;
}

ElementList normal_closure(const Subgroup& g, const std::vector<Mat2>& seed, std::size_t cap,
                           std::vector<Mat2>* closure_gens) {
    residue_t n = g.modulus();
    std::vector<Mat2> normal_gens;
    for (auto& s : seed)
        if (!s.is_identity()) normal_gens.push_back(s);

    std::vector<packed_t> conj;
    std::vector<packed_t> conj_inv;
    for (auto& gg : g.generators()) {
        conj.push_back(gg.pack());
        conj_inv.push_back(mat_inv(gg).pack());
    }

    ElementList cur;
    cur.modulus = n;
    cur.elems = {Mat2::identity(n).pack()};
    while (true) {
        cur = closure(n, normal_gens, cur.elems, cap);
        // scan for generator-conjugates falling outside the current set
        std::vector<Mat2> fresh;
        for (packed_t x : cur.elems) {
            for (std::size_t i = 0; i < conj.size(); ++i) {
                packed_t y = packed_mul(packed_mul(conj[i], x, n), conj_inv[i], n);
                if (!cur.contains(y)) {
                    fresh.push_back(Mat2::unpack(y, n));
                    if (fresh.size() >= 64) break;  // re-close, then rescan
                }
            }
            if (fresh.size() >= 64) break;
        }
        if (fresh.empty()) break;
        for (auto& f : fresh) normal_gens.push_back(f);
    }
    if (closure_gens) *closure_gens = std::move(normal_gens);
    return cur;
}

CommutatorSubgroup commutator_subgroup(const Subgroup& g, std::size_t cap) {
    residue_t n = g.modulus();
    const auto& gens = g.generators();
    std::vector<Mat2> comms;
    PackedSet seen(64);
    for (std::size_t i = 0; i < gens.size(); ++i) {
        for (std::size_t j = i + 1; j < gens.size(); ++j) {
            Mat2 c = mat_mul(mat_mul(gens[i], gens[j]), mat_inv(mat_mul(gens[j], gens[i])));
            if (!c.is_identity() && seen.insert(c.pack())) comms.push_back(c);
        }
    }
    std::vector<Mat2> rgens;
    ElementList elems = normal_closure(g, comms, cap, &rgens);
    CommutatorSubgroup out{Subgroup(n, std::move(rgens), g.label().empty() ? "" : g.label() + "'"),
                           std::move(elems)};
    return out;
}

Subgroup conjugate_subgroup(const Subgroup& g, const Mat2& c) {
    std::vector<Mat2> gens;
    for (auto& x : g.generators()) gens.push_back(mat_conj(c, x));
    return Subgroup(g.modulus(), std::move(gens), g.label());
}

std::vector<Mat2> greedy_generators(residue_t modulus, const std::vector<packed_t>& elems) {
    std::vector<Mat2> gens;
    ElementList cur;
    cur.modulus = modulus;
    cur.elems = {Mat2::identity(modulus).pack()};
    while (cur.elems.size() < elems.size()) {
        packed_t pick = 0;
        bool found = false;
        for (packed_t v : elems)
            if (!cur.contains(v)) { pick = v; found = true; break; }
        if (!found) break;
        gens.push_back(Mat2::unpack(pick, modulus));
        cur = closure(modulus, gens);
    }
    return gens;
}

Subgroup subgroup_from_elements(residue_t modulus, const std::vector<packed_t>& elems,
                                std::string label) {
    return Subgroup(modulus, greedy_generators(modulus, elems), std::move(label));
}

ElementList sl2_part(const Subgroup& g) {
    const auto& all = g.elements();
    ElementList out;
    out.modulus = g.modulus();
    residue_t n = g.modulus();
    for (packed_t v : all.elems) {
        Mat2 m = Mat2::unpack(v, n);
        if (m.det() == 1 % n) out.elems.push_back(v);
    }
    return out;
}

}  // namespace gl2
