#include "gl2/goursat.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "gl2/constructions.hpp"

namespace gl2 {

namespace {

// ---------- conjugacy classes ----------

std::vector<std::vector<std::uint32_t>> conjugacy_classes(const Subgroup& g) {
    const ElementList& el = g.elements();
    residue_t n = g.modulus();
    auto pos = [&](packed_t v) {
        return std::uint32_t(std::lower_bound(el.elems.begin(), el.elems.end(), v) - el.elems.begin());
    };
    std::vector<packed_t> cg, cgi;
    for (auto& x : g.generators()) {
        cg.push_back(x.pack());
        cgi.push_back(mat_inv(x).pack());
    }
    std::vector<bool> seen(el.size(), false);
    std::vector<std::vector<std::uint32_t>> classes;
    for (std::uint32_t i = 0; i < el.size(); ++i) {
        if (seen[i]) continue;
        std::vector<std::uint32_t> cls{i};
        seen[i] = true;
        for (std::size_t k = 0; k < cls.size(); ++k) {
            packed_t x = el.elems[cls[k]];
            for (std::size_t t = 0; t < cg.size(); ++t) {
                packed_t y = packed_mul(packed_mul(cg[t], x, n), cgi[t], n);
                std::uint32_t j = pos(y);
                if (!seen[j]) {
                    seen[j] = true;
                    cls.push_back(j);
                }
            }
        }
        classes.push_back(std::move(cls));
    }
    return classes;
}

// ---------- small quotient groups ----------

struct SmallGroup {
    std::uint32_t n = 1;
    std::uint32_t id = 0;
    std::vector<std::uint16_t> mul;   // n * n
    std::vector<std::uint16_t> ord;   // element orders
    std::vector<packed_t> rep;        // coset representative per element
    residue_t rep_modulus = 1;

    std::uint16_t at(std::uint32_t i, std::uint32_t j) const { return mul[std::size_t(i) * n + j]; }
    std::uint64_t invariant_hash() const {
        std::map<std::uint16_t, std::uint32_t> oc;
        for (auto o : ord) ++oc[o];
        std::uint64_t h = n;
        for (auto& [o, c] : oc) h = h * 1000003u + o * 131u + c;
        bool ab = true;
        for (std::uint32_t i = 0; i < n && ab; ++i)
            for (std::uint32_t j = i + 1; j < n && ab; ++j)
                if (at(i, j) != at(j, i)) ab = false;
        h = h * 2 + (ab ? 1 : 0);
        return h;
    }
};

SmallGroup quotient_group(const Subgroup& g, const ElementList& kernel) {
    const ElementList& el = g.elements();
    residue_t n = g.modulus();
    auto pos = [&](packed_t v) {
        return std::size_t(std::lower_bound(el.elems.begin(), el.elems.end(), v) - el.elems.begin());
    };
    std::vector<std::uint32_t> cid(el.size(), UINT32_MAX);
    std::vector<packed_t> reps;
    for (std::size_t i = 0; i < el.size(); ++i) {
        if (cid[i] != UINT32_MAX) continue;
        std::uint32_t c = std::uint32_t(reps.size());
        reps.push_back(el.elems[i]);
        for (packed_t k : kernel.elems) cid[pos(packed_mul(el.elems[i], k, n))] = c;
    }
    SmallGroup q;
    q.n = std::uint32_t(reps.size());
    q.rep = reps;
    q.rep_modulus = n;
    q.mul.resize(std::size_t(q.n) * q.n);
    for (std::uint32_t i = 0; i < q.n; ++i)
        for (std::uint32_t j = 0; j < q.n; ++j)
            q.mul[std::size_t(i) * q.n + j] = std::uint16_t(cid[pos(packed_mul(reps[i], reps[j], n))]);
    q.id = std::uint16_t(cid[pos(Mat2::identity(n).pack())]);
    q.ord.resize(q.n);
    for (std::uint32_t i = 0; i < q.n; ++i) {
        std::uint16_t o = 1;
        std::uint32_t x = i;
        while (x != q.id) {
            x = q.at(x, i);
            ++o;
        }
        q.ord[i] = o;
    }
    return q;
}

std::vector<std::uint32_t> small_closure(const SmallGroup& g, const std::vector<std::uint32_t>& gens) {
    std::vector<bool> in(g.n, false);
    std::vector<std::uint32_t> out{g.id};
    in[g.id] = true;
    for (std::size_t k = 0; k < out.size(); ++k)
        for (auto gen : gens) {
            std::uint32_t y = g.at(out[k], gen);
            if (!in[y]) {
                in[y] = true;
                out.push_back(y);
            }
        }
    return out;
}

std::vector<std::uint32_t> minimal_generators(const SmallGroup& g) {
    std::vector<std::uint32_t> gens;
    std::vector<std::uint32_t> cur{g.id};
    while (cur.size() < g.n) {
        std::uint32_t pick = UINT32_MAX;
        for (std::uint32_t cand = 0; cand < g.n; ++cand) {
            if (std::find(cur.begin(), cur.end(), cand) != cur.end()) continue;
            if (pick == UINT32_MAX || g.ord[cand] > g.ord[pick]) pick = cand;
        }
        gens.push_back(pick);
        cur = small_closure(g, gens);
    }
    return gens;
}

std::vector<std::vector<std::uint32_t>> isomorphisms(const SmallGroup& a, const SmallGroup& b,
                                                     std::size_t max_count) {
    std::vector<std::vector<std::uint32_t>> found;
    if (a.n != b.n) return found;
    if (a.invariant_hash() != b.invariant_hash()) return found;
    auto agens = minimal_generators(a);

    auto extends = [&](const std::vector<std::uint32_t>& images) {
        std::vector<std::uint32_t> img(a.n, UINT32_MAX);
        img[a.id] = b.id;
        std::vector<std::uint32_t> queue{a.id};
        for (std::size_t k = 0; k < queue.size(); ++k) {
            std::uint32_t x = queue[k];
            for (std::size_t gi = 0; gi < agens.size(); ++gi) {
                std::uint32_t y = a.at(x, agens[gi]);
                std::uint32_t iy = b.at(img[x], images[gi]);
                if (img[y] == UINT32_MAX) {
                    img[y] = iy;
                    queue.push_back(y);
                } else if (img[y] != iy) {
                    return false;
                }
            }
        }
        if (queue.size() != a.n) return false;
        std::vector<bool> hit(b.n, false);
        for (auto v : img) {
            if (v == UINT32_MAX || hit[v]) return false;
            hit[v] = true;
        }
        return true;
    };

    std::vector<std::uint32_t> images(agens.size());
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (found.size() >= max_count) return;
        if (i == agens.size()) {
            if (extends(images)) found.push_back(images);
            return;
        }
        for (std::uint32_t cand = 0; cand < b.n; ++cand) {
            if (b.ord[cand] != a.ord[agens[i]]) continue;
            images[i] = cand;
            std::vector<std::uint32_t> pa(agens.begin(), agens.begin() + i + 1);
            std::vector<std::uint32_t> pb(images.begin(), images.begin() + i + 1);
            if (small_closure(a, pa).size() != small_closure(b, pb).size()) continue;
            rec(i + 1);
        }
    };
    rec(0);
    return found;
}

struct NormalCache {
    std::map<std::pair<residue_t, std::uint64_t>, std::vector<ElementList>> memo;
};
NormalCache& ncache() {
    static NormalCache c;
    return c;
}

}  // namespace

std::vector<ElementList> normal_subgroups(const Subgroup& g, std::uint64_t index_bound) {
    auto key = std::make_pair(g.modulus(), g.element_hash());
    std::vector<ElementList> all;
    auto it = ncache().memo.find(key);
    if (it != ncache().memo.end()) {
        all = it->second;
    } else {
        const ElementList& el = g.elements();
        residue_t n = g.modulus();
        auto classes = conjugacy_classes(g);

        std::map<std::uint64_t, ElementList> found;
        ElementList triv;
        triv.modulus = n;
        triv.elems = {Mat2::identity(n).pack()};
        found[triv.hash()] = triv;

        std::vector<ElementList> queue{triv};
        while (!queue.empty()) {
            ElementList cur = std::move(queue.back());
            queue.pop_back();
            for (auto& cls : classes) {
                packed_t rep = el.elems[cls[0]];
                if (cur.contains(rep)) continue;
                std::vector<Mat2> seed;
                for (auto& m : greedy_generators(n, cur.elems)) seed.push_back(m);
                seed.push_back(Mat2::unpack(rep, n));
                ElementList ext = normal_closure(g, seed);
                auto h = ext.hash();
                if (!found.count(h)) {
                    found[h] = ext;
                    queue.push_back(std::move(ext));
                    if (found.size() > 4096)
                        throw std::runtime_error("normal subgroup lattice exceeds bound");
                }
            }
        }
        for (auto& [h, s] : found) all.push_back(std::move(s));
        ncache().memo[key] = all;
    }
    std::vector<ElementList> out;
    std::uint64_t order = g.order();
    for (auto& s : all)
        if (order / s.size() <= index_bound) out.push_back(s);
    return out;
}

SubdirectProduct fiber_product(const Subgroup& a, const Subgroup& b, const QuotientMatch& q) {
    if (gcd_u64(a.modulus(), b.modulus()) != 1)
        throw ModulusMismatch("fiber_product: factor moduli must be coprime");
    residue_t joint_mod = residue_t(std::uint64_t(a.modulus()) * b.modulus());

    auto embed = [&](const Mat2& xa, const Mat2& xb) { return crt_join({xa, xb}); };
    std::vector<Mat2> gens;
    for (auto& [ga, gb] : q.pairing) gens.push_back(embed(ga, gb));
    for (auto& ka : greedy_generators(a.modulus(), q.kernel_a.elements().elems))
        gens.push_back(embed(ka, Mat2::identity(b.modulus())));
    for (auto& kb : greedy_generators(b.modulus(), q.kernel_b.elements().elems))
        gens.push_back(embed(Mat2::identity(a.modulus()), kb));

    SubdirectProduct sp;
    sp.factor_a = a;
    sp.factor_b = b;
    sp.joint = Subgroup(joint_mod, std::move(gens));
    sp.quotient_order = q.order;

    std::uint64_t expect = a.order() * b.order() / q.order;
    if (sp.joint.order() != expect)
        throw InvalidQuotientMap("fiber_product: matching data does not describe matched surjections");
    return sp;
}

std::uint64_t goursat_quotient_order(const Subgroup& a, const Subgroup& b, const Subgroup& joint) {
    Subgroup pa = reduce(joint, a.modulus());
    Subgroup pb = reduce(joint, b.modulus());
    if (pa.order() != a.order() || pb.order() != b.order())
        throw NotSubdirect("goursat_quotient_order: joint group does not surject onto the factors");
    return a.order() * b.order() / joint.order();
}

std::uint64_t goursat_quotient_order(const SubdirectProduct& c) {
    return goursat_quotient_order(c.factor_a, c.factor_b, c.joint);
}

std::map<std::uint64_t, QuotientMatch> common_quotient_orders(const Subgroup& a, const Subgroup& b,
                                                              std::uint64_t bound) {
    std::map<std::uint64_t, QuotientMatch> out;
    {
        QuotientMatch triv;
        triv.order = 1;
        triv.kernel_a = a;
        triv.kernel_b = b;
        out[1] = triv;
    }
    std::uint64_t oa = a.order(), ob = b.order();
    std::uint64_t g = gcd_u64(oa, ob);
    std::uint64_t cap = std::min<std::uint64_t>(bound, g);
    if (cap == 1) return out;

    auto nsa = normal_subgroups(a, cap);
    auto nsb = normal_subgroups(b, cap);

    std::map<std::uint64_t, std::vector<const ElementList*>> by_qa, by_qb;
    for (auto& n : nsa) {
        std::uint64_t q = oa / n.size();
        if (q > 1 && q <= cap && g % q == 0) by_qa[q].push_back(&n);
    }
    for (auto& n : nsb) {
        std::uint64_t q = ob / n.size();
        if (q > 1 && q <= cap && g % q == 0) by_qb[q].push_back(&n);
    }

    for (auto& [q, lista] : by_qa) {
        if (out.count(q)) continue;
        auto itb = by_qb.find(q);
        if (itb == by_qb.end()) continue;
        bool matched = false;
        for (auto* na : lista) {
            SmallGroup qa = quotient_group(a, *na);
            for (auto* nb : itb->second) {
                SmallGroup qb = quotient_group(b, *nb);
                auto isos = isomorphisms(qa, qb, 1);
                if (isos.empty()) continue;
                QuotientMatch m;
                m.order = q;
                m.kernel_a = subgroup_from_elements(a.modulus(), na->elems);
                m.kernel_b = subgroup_from_elements(b.modulus(), nb->elems);
                auto agens = minimal_generators(qa);
                for (std::size_t i = 0; i < agens.size(); ++i)
                    m.pairing.emplace_back(Mat2::unpack(qa.rep[agens[i]], a.modulus()),
                                           Mat2::unpack(qb.rep[isos[0][i]], b.modulus()));
                out[q] = std::move(m);
                matched = true;
                break;
            }
            if (matched) break;
        }
    }
    return out;
}

std::uint64_t delta_entanglement(const SubdirectProduct& c6) { return goursat_quotient_order(c6); }

bool coprime_commutator_triviality(const Subgroup& g6, const Subgroup& hp, residue_t p) {
    if (p < 5) throw Unsupported("coprime_commutator_triviality: p >= 5 required");
    for (auto& [q, e] : Factorization::of(g6.modulus()).primes) {
        (void)e;
        if (q != 2 && q != 3) throw ModulusMismatch("g6 must live over the primes 2,3");
    }
    auto c6 = commutator_subgroup(g6);
    for (auto& [q, e] : Factorization::of(c6.elems.size()).primes) {
        (void)e;
        if (q != 2 && q != 3) return false;
    }
    auto cp = commutator_subgroup(hp);
    for (auto& [q, e] : Factorization::of(cp.elems.size()).primes) {
        (void)e;
        if (q != p) return false;
    }
    return true;
}

std::vector<SubdirectProduct> enumerate_subdirect_products(const Subgroup& a, const Subgroup& b,
                                                           std::uint64_t bound) {
    std::vector<SubdirectProduct> out;
    std::uint64_t oa = a.order(), ob = b.order();
    std::uint64_t g = gcd_u64(oa, ob);
    std::uint64_t cap = std::min<std::uint64_t>(bound, g);

    auto nsa = normal_subgroups(a, cap);
    auto nsb = normal_subgroups(b, cap);
    std::vector<std::uint64_t> seen_hashes;
    for (auto& na : nsa) {
        std::uint64_t q = oa / na.size();
        if (q > cap) continue;
        for (auto& nb : nsb) {
            if (ob / nb.size() != q) continue;
            if (q == 1) {
                QuotientMatch m;
                m.order = 1;
                m.kernel_a = a;
                m.kernel_b = b;
                out.push_back(fiber_product(a, b, m));
                continue;
            }
            SmallGroup qa = quotient_group(a, na);
            SmallGroup qb = quotient_group(b, nb);
            auto isos = isomorphisms(qa, qb, 512);
            auto agens = minimal_generators(qa);
            for (auto& iso : isos) {
                QuotientMatch m;
                m.order = q;
                m.kernel_a = subgroup_from_elements(a.modulus(), na.elems);
                m.kernel_b = subgroup_from_elements(b.modulus(), nb.elems);
                for (std::size_t i = 0; i < agens.size(); ++i)
                    m.pairing.emplace_back(Mat2::unpack(qa.rep[agens[i]], a.modulus()),
                                           Mat2::unpack(qb.rep[iso[i]], b.modulus()));
                SubdirectProduct sp = fiber_product(a, b, m);
                auto h = sp.joint.element_hash();
                if (std::find(seen_hashes.begin(), seen_hashes.end(), h) == seen_hashes.end()) {
                    seen_hashes.push_back(h);
                    out.push_back(std::move(sp));
                }
            }
        }
    }
    return out;
}

}  // namespace gl2
