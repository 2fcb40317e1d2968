#include "gl2/maximal.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <optional>
#include <random>

#include "gl2/conjugacy.hpp"
#include "gl2/constructions.hpp"

namespace gl2 {

namespace {

// ---------- small-group machinery ----------

// All subgroups of an enumerated group with at most a few thousand elements,
// built by closing subgroups under single-element extensions.
std::vector<ElementList> all_subgroups_small(const Subgroup& g) {
    const ElementList& all = g.elements();
    residue_t n = g.modulus();
    struct Node {
        ElementList elems;
        std::vector<Mat2> gens;
    };
    std::map<std::uint64_t, Node> found;

    Node triv;
    triv.elems.modulus = n;
    triv.elems.elems = {Mat2::identity(n).pack()};
    auto th = triv.elems.hash();
    found[th] = triv;

    std::vector<std::uint64_t> queue{th};
    while (!queue.empty()) {
        std::uint64_t cur = queue.back();
        queue.pop_back();
        Node s = found[cur];
        if (s.elems.size() == all.size()) continue;
        for (packed_t e : all.elems) {
            if (s.elems.contains(e)) continue;
            auto gens = s.gens;
            gens.push_back(Mat2::unpack(e, n));
            ElementList ext = closure(n, gens, s.elems.elems);
            auto h = ext.hash();
            if (!found.count(h)) {
                found[h] = Node{std::move(ext), std::move(gens)};
                queue.push_back(h);
            }
        }
    }
    std::vector<ElementList> out;
    out.reserve(found.size());
    for (auto& [h, s] : found) out.push_back(std::move(s.elems));
    return out;
}

std::vector<MaximalSubgroup> maximal_from_subgroup_list(const Subgroup& g,
                                                        std::vector<ElementList> subs) {
    const ElementList& all = g.elements();
    std::vector<const ElementList*> proper;
    for (auto& s : subs)
        if (s.size() < all.size()) proper.push_back(&s);
    std::vector<MaximalSubgroup> out;
    for (auto* s : proper) {
        bool maximal = true;
        for (auto* t : proper) {
            if (t == s || t->size() <= s->size()) continue;
            if (std::includes(t->elems.begin(), t->elems.end(), s->elems.begin(), s->elems.end())) {
                maximal = false;
                break;
            }
        }
        if (maximal)
            out.push_back({subgroup_from_elements(g.modulus(), s->elems), all.size() / s->size()});
    }
    return out;
}

bool is_abelian(const Subgroup& g) {
    const auto& gens = g.generators();
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = i + 1; j < gens.size(); ++j)
            if (!(mat_mul(gens[i], gens[j]) == mat_mul(gens[j], gens[i]))) return false;
    return true;
}

// Maximal subgroups of an abelian group: for each prime r dividing the order,
// the preimages of the hyperplanes of G / <g^r>.
std::vector<MaximalSubgroup> maximal_abelian(const Subgroup& g) {
    const ElementList& all = g.elements();
    residue_t n = g.modulus();
    std::vector<MaximalSubgroup> out;
    for (auto& [r, e] : Factorization::of(all.size()).primes) {
        (void)e;
        std::vector<Mat2> rgens;
        for (packed_t v : all.elems) rgens.push_back(mat_pow(Mat2::unpack(v, n), r));
        ElementList gr = closure(n, rgens);
        std::size_t q = all.size() / gr.size();
        if (q == 1) continue;
        // coset vectors over F_r: identify cosets by minimal element
        auto coset_key = [&](packed_t x) {
            packed_t best = ~packed_t(0);
            for (packed_t d : gr.elems) {
                packed_t y = packed_mul(x, d, n);
                if (y < best) best = y;
            }
            return best;
        };
        std::vector<packed_t> keys;
        std::vector<packed_t> coset_of(all.size());
        for (std::size_t i = 0; i < all.size(); ++i) coset_of[i] = coset_key(all.elems[i]);
        keys = coset_of;
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        std::size_t m = keys.size();
        auto key_index = [&](packed_t k) {
            return std::size_t(std::lower_bound(keys.begin(), keys.end(), k) - keys.begin());
        };
        // group table on the quotient (elementary abelian of order r^k)
        std::vector<std::vector<std::size_t>> mul(m, std::vector<std::size_t>(m));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                mul[i][j] = key_index(coset_key(packed_mul(keys[i], keys[j], n)));
        // find a basis of the elementary abelian quotient, assigning F_r
        // coordinates to every coset along the way
        std::vector<std::vector<residue_t>> coords(m);
        std::vector<bool> assigned(m, false);
        std::size_t id = key_index(coset_key(Mat2::identity(n).pack()));
        assigned[id] = true;
        std::vector<std::size_t> span{id};
        std::size_t k = 0;
        for (std::size_t cand = 0; cand < m; ++cand) {
            if (assigned[cand]) continue;
            ++k;  // new basis vector
            for (auto& cv : coords) cv.resize(k, 0);
            std::vector<std::size_t> prev = span;
            for (std::size_t x : prev) {
                std::size_t t = x;
                for (residue_t c = 1; c < r; ++c) {
                    t = mul[t][cand];
                    if (!assigned[t]) {
                        coords[t] = coords[x];
                        coords[t].resize(k, 0);
                        coords[t][k - 1] = c;
                        assigned[t] = true;
                        span.push_back(t);
                    }
                }
            }
        }
        for (auto& cv : coords) cv.resize(k, 0);
        // hyperplanes = kernels of nonzero functionals up to scaling
        std::vector<std::vector<residue_t>> functionals;
        std::vector<residue_t> f(k, 0);
        std::function<void(std::size_t)> gen = [&](std::size_t i) {
            if (i == k) {
                auto it = std::find_if(f.begin(), f.end(), [](residue_t x) { return x != 0; });
                if (it != f.end() && *it == 1) functionals.push_back(f);
                return;
            }
            for (residue_t c = 0; c < r; ++c) {
                f[i] = c;
                gen(i + 1);
            }
            f[i] = 0;
        };
        gen(0);
        for (auto& fn : functionals) {
            std::vector<packed_t> kept;
            for (std::size_t i = 0; i < all.size(); ++i) {
                auto& cv = coords[key_index(coset_of[i])];
                std::uint64_t dot = 0;
                for (std::size_t j = 0; j < k; ++j) dot += std::uint64_t(fn[j]) * cv[j];
                if (dot % r == 0) kept.push_back(all.elems[i]);
            }
            out.push_back({subgroup_from_elements(n, kept), std::uint64_t(r)});
        }
    }
    return out;
}

// ---------- chief-step machinery ----------

using Vec4 = std::array<residue_t, 4>;  // coordinates of A in I + s*A

struct KernelModule {
    residue_t l = 2;        // prime of the step
    residue_t s = 1;        // m / l: kernel elements are I + s*A mod m
    residue_t m = 1;
    std::vector<Vec4> basis;  // echelon basis of the G-submodule V

    Vec4 coords(packed_t x) const {
        Mat2 mm = Mat2::unpack(x, m);
        auto cv = [&](residue_t entry, residue_t idv) {
            return residue_t(((entry + m - idv) % m) / s % l);
        };
        return Vec4{cv(mm.a, 1), cv(mm.b, 0), cv(mm.c, 0), cv(mm.d, 1)};
    }
    packed_t matrix_of(const Vec4& v) const {
        return Mat2(m, 1 + std::int64_t(s) * v[0], std::int64_t(s) * v[1], std::int64_t(s) * v[2],
                    1 + std::int64_t(s) * v[3])
            .pack();
    }
};

Vec4 vec_add(const Vec4& a, const Vec4& b, residue_t l) {
    return Vec4{residue_t((a[0] + b[0]) % l), residue_t((a[1] + b[1]) % l),
                residue_t((a[2] + b[2]) % l), residue_t((a[3] + b[3]) % l)};
}
Vec4 vec_scale(const Vec4& a, residue_t c, residue_t l) {
    return Vec4{residue_t(std::uint64_t(a[0]) * c % l), residue_t(std::uint64_t(a[1]) * c % l),
                residue_t(std::uint64_t(a[2]) * c % l), residue_t(std::uint64_t(a[3]) * c % l)};
}
bool vec_zero(const Vec4& a) { return a[0] == 0 && a[1] == 0 && a[2] == 0 && a[3] == 0; }

struct Space4 {
    residue_t l;
    std::vector<Vec4> basis;

    void reduce(Vec4& v) const {
        for (auto& b : basis) {
            unsigned p = pivot(b);
            if (p < 4 && v[p]) {
                residue_t f = residue_t(std::uint64_t(v[p]) * inv_mod(b[p], l) % l);
                v = vec_add(v, vec_scale(b, residue_t(l - f), l), l);
            }
        }
    }
    bool add(Vec4 v) {
        reduce(v);
        if (vec_zero(v)) return false;
        unsigned p = pivot(v);
        v = vec_scale(v, inv_mod(v[p], l), l);
        basis.push_back(v);
        std::sort(basis.begin(), basis.end(), [](const Vec4& a, const Vec4& b) { return pivot(a) < pivot(b); });
        // back-substitute to keep reduced echelon form
        for (std::size_t i = 0; i < basis.size(); ++i)
            for (std::size_t j = 0; j < basis.size(); ++j) {
                if (i == j) continue;
                unsigned p2 = pivot(basis[i]);
                if (basis[j][p2]) {
                    residue_t f = basis[j][p2];
                    basis[j] = vec_add(basis[j], vec_scale(basis[i], residue_t(l - f), l), l);
                }
            }
        return true;
    }
    bool contains(Vec4 v) const {
        reduce(v);
        return vec_zero(v);
    }
    static unsigned pivot(const Vec4& b) {
        for (unsigned i = 0; i < 4; ++i)
            if (b[i]) return i;
        return 4;
    }
    unsigned dim() const { return unsigned(basis.size()); }
};

// adjoint action of g (mod l) on Vec4 coordinates
std::array<Vec4, 4> adjoint_action(const Mat2& g, residue_t l) {
    Mat2 gl = mat_reduce(g, l);
    Mat2 gli = mat_inv(gl);
    std::array<Vec4, 4> cols;
    const std::array<Mat2, 4> base{Mat2(l, 1, 0, 0, 0), Mat2(l, 0, 1, 0, 0), Mat2(l, 0, 0, 1, 0),
                                   Mat2(l, 0, 0, 0, 1)};
    for (unsigned i = 0; i < 4; ++i) {
        // conj without invertibility requirement on the basis matrix
        Mat2 t = Mat2(l, 0, 0, 0, 0);
        {
            const Mat2& a = base[i];
            Mat2 ga(l, 0, 0, 0, 0);
            ga.a = residue_t((std::uint64_t(gl.a) * a.a + std::uint64_t(gl.b) * a.c) % l);
            ga.b = residue_t((std::uint64_t(gl.a) * a.b + std::uint64_t(gl.b) * a.d) % l);
            ga.c = residue_t((std::uint64_t(gl.c) * a.a + std::uint64_t(gl.d) * a.c) % l);
            ga.d = residue_t((std::uint64_t(gl.c) * a.b + std::uint64_t(gl.d) * a.d) % l);
            t.a = residue_t((std::uint64_t(ga.a) * gli.a + std::uint64_t(ga.b) * gli.c) % l);
            t.b = residue_t((std::uint64_t(ga.a) * gli.b + std::uint64_t(ga.b) * gli.d) % l);
            t.c = residue_t((std::uint64_t(ga.c) * gli.a + std::uint64_t(ga.d) * gli.c) % l);
            t.d = residue_t((std::uint64_t(ga.c) * gli.b + std::uint64_t(ga.d) * gli.d) % l);
        }
        cols[i] = Vec4{t.a, t.b, t.c, t.d};
    }
    return cols;
}

Vec4 apply_action(const std::array<Vec4, 4>& act, const Vec4& v, residue_t l) {
    Vec4 out{0, 0, 0, 0};
    for (unsigned i = 0; i < 4; ++i)
        if (v[i]) out = vec_add(out, vec_scale(act[i], v[i], l), l);
    return out;
}

// all G-submodules of V (dimension <= 4 over F_l): cyclic submodules from
// every vector, closed under joins; deduped by reduced echelon signature
std::vector<Space4> all_submodules(const Space4& v, const std::vector<std::array<Vec4, 4>>& acts,
                                   residue_t l) {
    auto signature = [](const Space4& s) {
        std::uint64_t h = 1 + s.basis.size();
        for (auto& b : s.basis)
            for (auto x : b) h = h * 131071u + x;
        return h;
    };
    auto module_close = [&](Space4 s) {
        bool grew = true;
        while (grew) {
            grew = false;
            auto snapshot = s.basis;
            for (auto& b : snapshot)
                for (auto& act : acts)
                    if (s.add(apply_action(act, b, l))) grew = true;
        }
        return s;
    };

    std::vector<Space4> out;
    std::vector<std::uint64_t> sigs;
    auto push = [&](const Space4& s) {
        auto sg = signature(s);
        for (std::size_t i = 0; i < out.size(); ++i)
            if (sigs[i] == sg && out[i].basis == s.basis) return false;
        out.push_back(s);
        sigs.push_back(sg);
        return true;
    };
    push(Space4{l, {}});

    // cyclic submodules
    unsigned d = v.dim();
    if (d > 0) {
        std::vector<residue_t> c(d, 0);
        while (true) {
            unsigned i = 0;
            while (i < d && ++c[i] == l) c[i++] = 0;
            if (i == d) break;
            Vec4 w{0, 0, 0, 0};
            for (unsigned j = 0; j < d; ++j) w = vec_add(w, vec_scale(v.basis[j], c[j], l), l);
            Space4 s{l, {}};
            s.add(w);
            push(module_close(s));
        }
    }
    // joins
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j) {
            Space4 s = out[i];
            bool changed = false;
            for (auto& b : out[j].basis)
                if (s.add(b)) changed = true;
            if (changed) push(s);
            if (out.size() > 4096) throw std::runtime_error("submodule lattice exceeds bound");
        }
    return out;
}

// quotient coordinates V -> V/W given echelon bases
struct QuotientCoords {
    residue_t l;
    Space4 w;
    std::vector<Vec4> lift_basis;  // vectors of V spanning a complement of W

    std::vector<residue_t> project(Vec4 v) const {
        // coordinates of v modulo W in terms of lift_basis
        // solve v = W-part + sum c_i lift_basis[i] by Gaussian elimination
        // on the combined basis
        std::vector<residue_t> out(lift_basis.size(), 0);
        // reduce against W then express in lift space (lift_basis echelon-compatible)
        for (std::size_t i = 0; i < lift_basis.size(); ++i) {
            unsigned p = Space4::pivot(lift_basis[i]);
            // make v's p-entry zero after removing W-part repeatedly
            w.reduce(v);
            if (p < 4 && v[p]) {
                residue_t f = residue_t(std::uint64_t(v[p]) * inv_mod(lift_basis[i][p], l) % l);
                out[i] = f;
                v = vec_add(v, vec_scale(lift_basis[i], residue_t(l - f), l), l);
            }
        }
        w.reduce(v);
        if (!vec_zero(v)) throw std::logic_error("quotient projection failed");
        return out;
    }
};

QuotientCoords make_quotient(const Space4& v, const Space4& w, residue_t l) {
    QuotientCoords qc;
    qc.l = l;
    qc.w = w;
    // pick basis vectors of V independent modulo W
    Space4 acc = w;
    for (auto& b : v.basis) {
        Vec4 r = b;
        acc.reduce(r);
        if (!vec_zero(r)) {
            Vec4 normalized = r;
            unsigned p = Space4::pivot(normalized);
            normalized = vec_scale(normalized, inv_mod(normalized[p], l), l);
            qc.lift_basis.push_back(normalized);
            acc.add(normalized);
        }
    }
    // echelonize lift_basis by pivot order for the projection loop
    std::sort(qc.lift_basis.begin(), qc.lift_basis.end(),
              [](const Vec4& a, const Vec4& b) { return Space4::pivot(a) < Space4::pivot(b); });
    return qc;
}

// ---------- cocycle solver for complements ----------

// Linear system over F_l with nv unknowns, built incrementally.
struct LinearSystem {
    residue_t l;
    std::size_t nv;
    std::vector<std::vector<residue_t>> rows;  // each row: nv coefficients + rhs

    bool add(std::vector<residue_t> row) {
        // reduce against existing echelon rows
        for (auto& r : rows) {
            std::size_t p = pivot(r);
            if (p < nv && row[p]) {
                residue_t f = residue_t(std::uint64_t(row[p]) * inv_mod(r[p], l) % l);
                for (std::size_t i = 0; i <= nv; ++i)
                    row[i] = residue_t((row[i] + std::uint64_t(l - f) * r[i]) % l);
            }
        }
        std::size_t p = pivot(row);
        if (p == nv) return row[nv] == 0;  // consistent iff rhs vanished
        residue_t f = inv_mod(row[p], l);
        for (auto& x : row) x = residue_t(std::uint64_t(x) * f % l);
        rows.push_back(std::move(row));
        std::sort(rows.begin(), rows.end(), [this](auto& a, auto& b) { return pivot(a) < pivot(b); });
        return true;
    }
    std::size_t pivot(const std::vector<residue_t>& r) const {
        for (std::size_t i = 0; i < nv; ++i)
            if (r[i]) return i;
        return nv;
    }
    // all solutions (particular + nullspace span), empty if inconsistent flag set
    std::vector<std::vector<residue_t>> all_solutions(std::size_t limit) const {
        std::vector<bool> is_pivot(nv, false);
        for (auto& r : rows) is_pivot[pivot(r)] = true;
        std::vector<std::size_t> free;
        for (std::size_t i = 0; i < nv; ++i)
            if (!is_pivot[i]) free.push_back(i);
        std::vector<std::vector<residue_t>> sols;
        std::vector<residue_t> fc(free.size(), 0);
        while (true) {
            std::vector<residue_t> x(nv, 0);
            for (std::size_t i = 0; i < free.size(); ++i) x[free[i]] = fc[i];
            // back substitution
            for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
                std::size_t p = pivot(*it);
                std::uint64_t acc = (*it)[nv];
                for (std::size_t i = p + 1; i < nv; ++i)
                    acc = (acc + std::uint64_t(l - (*it)[i]) * x[i]) % l;
                x[p] = residue_t(acc % l);
            }
            sols.push_back(x);
            if (sols.size() > limit) throw std::runtime_error("cocycle solution space too large");
            std::size_t i = 0;
            while (i < free.size() && ++fc[i] == l) fc[i++] = 0;
            if (i == free.size()) break;
            if (free.empty()) break;
        }
        return sols;
    }
};

struct MaxCache {
    std::map<std::pair<residue_t, std::uint64_t>, std::vector<MaximalSubgroup>> memo;
};

MaxCache& cache() {
    static MaxCache c;
    return c;
}

std::vector<MaximalSubgroup> maximal_rec(const Subgroup& g, residue_t hint);

// maximal subgroups through a chief step with kernel module V at prime l;
// when hint != 0 the group is the full preimage of its image mod hint with
// hint | m/l, so V is the full congruence kernel and lifts are free
std::vector<MaximalSubgroup> chief_step(const Subgroup& g, residue_t l, residue_t hint) {
    residue_t m = g.modulus();
    residue_t small = residue_t(m / l);
    bool full_kernel = hint != 0 && small % hint == 0;

    KernelModule km;
    km.l = l;
    km.m = m;
    km.s = small;

    // V = G cap Ker(GL2(m)->GL2(small)); kernel elements are I + small*A
    Space4 v{l, {}};
    std::vector<packed_t> v_elems;
    if (full_kernel) {
        for (residue_t a = 0; a < l; ++a)
            for (residue_t b = 0; b < l; ++b)
                for (residue_t c = 0; c < l; ++c)
                    for (residue_t d = 0; d < l; ++d) {
                        v_elems.push_back(km.matrix_of(Vec4{a, b, c, d}));
                        v.add(Vec4{a, b, c, d});
                    }
    } else {
        const ElementList& gel = g.elements();
        for (residue_t a = 0; a < l; ++a)
            for (residue_t b = 0; b < l; ++b)
                for (residue_t c = 0; c < l; ++c)
                    for (residue_t d = 0; d < l; ++d) {
                        packed_t x = km.matrix_of(Vec4{a, b, c, d});
                        if (gel.contains(x)) {
                            v_elems.push_back(x);
                            v.add(Vec4{a, b, c, d});
                        }
                    }
    }

    Subgroup q = reduce(g, small);
    const ElementList& qel = q.elements();

    std::vector<MaximalSubgroup> out;

    // type (a): pull back maximal subgroups of the quotient
    {
        residue_t qhint = (hint != 0 && small % hint == 0 && small != hint) ? hint : 0;
        std::vector<MaximalSubgroup> qmax = maximal_rec(q, qhint);
        for (auto& u : qmax) {
            std::vector<Mat2> gens;
            for (auto& ug : u.group.generators()) {
                Mat2 lift(m, ug.a, ug.b, ug.c, ug.d);
                if (full_kernel) {
                    // any entrywise lift lies in the preimage-closed group
                    gens.push_back(lift);
                    continue;
                }
                // otherwise search the kernel coset for a member of G
                const ElementList& gel = g.elements();
                bool found = false;
                for (packed_t kv : closure(m, congruence_kernel_generators(m, small)).elems) {
                    Mat2 cand = mat_mul(lift, Mat2::unpack(kv, m));
                    if (gel.contains(cand.pack())) {
                        gens.push_back(cand);
                        found = true;
                        break;
                    }
                }
                if (!found) throw std::logic_error("chief_step: no preimage of quotient generator");
            }
            for (packed_t kv : v_elems) gens.push_back(Mat2::unpack(kv, m));
            out.push_back({Subgroup(m, std::move(gens)), u.index});
        }
    }

    if (v.dim() == 0) return out;

    // type (b): complements over maximal submodules W < V
    std::vector<std::array<Vec4, 4>> acts;
    for (auto& gg : g.generators()) acts.push_back(adjoint_action(gg, l));
    std::vector<Space4> subs = all_submodules(v, acts, l);
    std::vector<Space4> maximal_subs;
    for (auto& w : subs) {
        if (w.dim() == v.dim()) continue;
        bool maximal = true;
        for (auto& w2 : subs) {
            if (w2.dim() <= w.dim() || w2.dim() == v.dim()) continue;
            // w < w2 < v ?
            bool contains_w = true;
            for (auto& b : w.basis)
                if (!w2.contains(b)) { contains_w = false; break; }
            if (contains_w) { maximal = false; break; }
        }
        if (maximal) maximal_subs.push_back(w);
    }

    // BFS data over Q for the cocycle equations
    auto qpos = [&](packed_t x) {
        auto it = std::lower_bound(qel.elems.begin(), qel.elems.end(), x);
        if (it == qel.elems.end() || *it != x) throw std::logic_error("chief_step: element outside Q");
        return std::size_t(it - qel.elems.begin());
    };

    std::vector<Mat2> qgens;
    std::vector<Mat2> glifts;  // lifts of the q-generators into G
    for (auto& gg : g.generators()) {
        Mat2 r = mat_reduce(gg, small);
        if (r.is_identity()) continue;
        qgens.push_back(r);
        glifts.push_back(gg);
    }
    if (qgens.empty()) {
        // Q trivial: G = V; maximal subgroups of the elementary abelian V are
        // its hyperplanes (the stable_subspaces of codimension 1, stability is
        // automatic since conjugation by V is trivial)
        for (auto& w : subs) {
            if (w.dim() + 1 != v.dim()) continue;
            std::vector<packed_t> kept;
            for (packed_t kv : v_elems)
                if (w.contains(km.coords(kv))) kept.push_back(kv);
            out.push_back({subgroup_from_elements(m, kept), l});
        }
        return out;
    }

    for (auto& w : maximal_subs) {
        QuotientCoords qc = make_quotient(v, w, l);
        std::size_t d = qc.lift_basis.size();
        std::size_t ng = qgens.size();
        std::size_t nv = d * ng;

        // actions of the generators on V/W
        std::vector<std::vector<std::vector<residue_t>>> qact(ng);      // [gen][basis i] -> coords
        std::vector<std::vector<std::vector<residue_t>>> qact_inv(ng);  // inverse action
        for (std::size_t gi = 0; gi < ng; ++gi) {
            auto act = adjoint_action(glifts[gi], l);
            auto act_inv = adjoint_action(mat_inv(glifts[gi]), l);
            qact[gi].resize(d);
            qact_inv[gi].resize(d);
            for (std::size_t i = 0; i < d; ++i) {
                qact[gi][i] = qc.project(apply_action(act, qc.lift_basis[i], l));
                qact_inv[gi][i] = qc.project(apply_action(act_inv, qc.lift_basis[i], l));
            }
        }
        auto apply_q = [&](const std::vector<std::vector<residue_t>>& a,
                           const std::vector<residue_t>& x) {
            std::vector<residue_t> out2(d, 0);
            for (std::size_t i = 0; i < d; ++i)
                if (x[i])
                    for (std::size_t k2 = 0; k2 < d; ++k2)
                        out2[k2] = residue_t((out2[k2] + std::uint64_t(x[i]) * a[i][k2]) % l);
            return out2;
        };

        // w-function per Q element: affine map  M_q u + c_q with u in F_l^nv
        struct Affine {
            std::vector<std::vector<residue_t>> mat;  // d rows of nv coefficients
            std::vector<residue_t> cst;               // d constants
            bool defined = false;
        };
        std::vector<Affine> wq(qel.elems.size());
        LinearSystem sys{l, nv, {}};
        bool consistent = true;

        std::size_t id_idx = qpos(Mat2::identity(small).pack());
        wq[id_idx].defined = true;
        wq[id_idx].mat.assign(d, std::vector<residue_t>(nv, 0));
        wq[id_idx].cst.assign(d, 0);

        std::vector<packed_t> glift_packed;
        for (auto& gl : glifts) glift_packed.push_back(gl.pack());

        std::vector<std::size_t> queue{id_idx};
        std::vector<packed_t> lift_of(qel.elems.size());
        lift_of[id_idx] = Mat2::identity(m).pack();
        for (std::size_t qi = 0; qi < queue.size() && consistent; ++qi) {
            std::size_t cur = queue[qi];
            packed_t qcur = qel.elems[cur];
            packed_t lcur = lift_of[cur];
            for (std::size_t gi = 0; gi < ng && consistent; ++gi) {
                packed_t qnext = packed_mul(qcur, qgens[gi].pack(), small);
                std::size_t nxt = qpos(qnext);
                packed_t lnext_via = packed_mul(lcur, glift_packed[gi], m);
                // affine expression for w(q * q_i) = delta + Ad(g_i^-1) w(q) + v_i
                // where delta is the kernel offset of the lift product
                auto compute_rhs = [&](const Affine& wcur, const Vec4& delta_coords) {
                    Affine r;
                    r.defined = true;
                    r.mat.assign(d, std::vector<residue_t>(nv, 0));
                    r.cst.assign(d, 0);
                    // Ad(g_i^{-1}) w(q)
                    for (std::size_t row = 0; row < d; ++row) {
                        for (std::size_t i = 0; i < d; ++i) {
                            residue_t coef = qact_inv[gi][i][row];
                            if (!coef) continue;
                            for (std::size_t u = 0; u < nv; ++u)
                                r.mat[row][u] = residue_t((r.mat[row][u] +
                                                           std::uint64_t(coef) * wcur.mat[i][u]) % l);
                            r.cst[row] = residue_t((r.cst[row] + std::uint64_t(coef) * wcur.cst[i]) % l);
                        }
                    }
                    // + v_i  (unknown block gi)
                    for (std::size_t row = 0; row < d; ++row)
                        r.mat[row][gi * d + row] = residue_t((r.mat[row][gi * d + row] + 1) % l);
                    // + delta
                    auto dc = qc.project(delta_coords);
                    for (std::size_t row = 0; row < d; ++row)
                        r.cst[row] = residue_t((r.cst[row] + dc[row]) % l);
                    return r;
                };

                if (!wq[nxt].defined) {
                    lift_of[nxt] = lnext_via;
                    // delta = 0 by choosing this lift
                    Affine r = compute_rhs(wq[cur], Vec4{0, 0, 0, 0});
                    wq[nxt] = std::move(r);
                    queue.push_back(nxt);
                } else {
                    // delta = lift(next)^{-1} * (lift(cur) * g_i)  in V
                    packed_t delta = packed_mul(mat_inv(Mat2::unpack(lift_of[nxt], m)).pack(), lnext_via, m);
                    Vec4 dco = km.coords(delta);
                    if (!v.contains(dco)) throw std::logic_error("chief_step: discrepancy outside V");
                    Affine rhs = compute_rhs(wq[cur], dco);
                    // equation: rhs == wq[nxt]
                    for (std::size_t row = 0; row < d && consistent; ++row) {
                        std::vector<residue_t> eq(nv + 1, 0);
                        for (std::size_t u = 0; u < nv; ++u)
                            eq[u] = residue_t((rhs.mat[row][u] + std::uint64_t(l) - wq[nxt].mat[row][u]) % l);
                        eq[nv] = residue_t((wq[nxt].cst[row] + std::uint64_t(l) - rhs.cst[row]) % l);
                        if (!sys.add(std::move(eq))) consistent = false;
                    }
                }
            }
        }
        if (!consistent) continue;

        // quotient out the coboundaries: v_i ~ v_i + Ad(g_i^{-1}) x - x
        LinearSystem cob{l, nv, {}};
        for (auto& r : sys.rows) cob.rows.push_back(r);
        std::vector<std::vector<residue_t>> cob_basis;
        for (std::size_t i = 0; i < d; ++i) {
            std::vector<residue_t> x(d, 0);
            x[i] = 1;
            std::vector<residue_t> dir(nv, 0);
            for (std::size_t gi = 0; gi < ng; ++gi) {
                auto ax = apply_q(qact_inv[gi], x);
                for (std::size_t row = 0; row < d; ++row)
                    dir[gi * d + row] = residue_t((ax[row] + std::uint64_t(l) - x[row]) % l);
            }
            cob_basis.push_back(dir);
        }

        std::vector<std::vector<residue_t>> sols = sys.all_solutions(4096);
        // dedup modulo the coboundary span
        LinearSystem span{l, nv, {}};
        std::vector<std::vector<residue_t>> reps;
        auto reduce_mod_cob = [&](std::vector<residue_t> x) {
            // reduce x against the coboundary space (as a subspace)
            Space4 dummy{l, {}};
            (void)dummy;
            // build echelon of cob_basis once
            static thread_local std::vector<std::vector<residue_t>> ech;
            ech.clear();
            for (auto cb : cob_basis) {
                for (auto& r : ech) {
                    std::size_t p = nv;
                    for (std::size_t i = 0; i < nv; ++i)
                        if (r[i]) { p = i; break; }
                    if (p < nv && cb[p]) {
                        residue_t f = residue_t(std::uint64_t(cb[p]) * inv_mod(r[p], l) % l);
                        for (std::size_t i = 0; i < nv; ++i)
                            cb[i] = residue_t((cb[i] + std::uint64_t(l - f) * r[i]) % l);
                    }
                }
                bool nz = false;
                for (auto xx : cb)
                    if (xx) nz = true;
                if (nz) ech.push_back(cb);
            }
            for (auto& r : ech) {
                std::size_t p = nv;
                for (std::size_t i = 0; i < nv; ++i)
                    if (r[i]) { p = i; break; }
                if (p < nv && x[p]) {
                    residue_t f = residue_t(std::uint64_t(x[p]) * inv_mod(r[p], l) % l);
                    for (std::size_t i = 0; i < nv; ++i)
                        x[i] = residue_t((x[i] + std::uint64_t(l - f) * r[i]) % l);
                }
            }
            return x;
        };
        std::vector<std::vector<residue_t>> seen;
        for (auto& s : sols) {
            auto r = reduce_mod_cob(s);
            if (std::find(seen.begin(), seen.end(), r) != seen.end()) continue;
            seen.push_back(r);
            reps.push_back(s);
        }

        // build the subgroup for each cocycle class
        std::vector<packed_t> w_elems;
        for (packed_t kv : v_elems)
            if (w.contains(km.coords(kv))) w_elems.push_back(kv);
        for (auto& u : reps) {
            std::vector<Mat2> gens;
            for (std::size_t gi = 0; gi < ng; ++gi) {
                Vec4 vi{0, 0, 0, 0};
                for (std::size_t i = 0; i < d; ++i)
                    vi = vec_add(vi, vec_scale(qc.lift_basis[i], u[gi * d + i], l), l);
                gens.push_back(mat_mul(glifts[gi], Mat2::unpack(km.matrix_of(vi), m)));
            }
            for (packed_t kv : w_elems) gens.push_back(Mat2::unpack(kv, m));
            std::uint64_t idx = 1;  // index = |V/W| = l^d
            for (std::size_t i = 0; i < d; ++i) idx *= l;
            out.push_back({Subgroup(m, std::move(gens)), idx});
        }
    }
    return out;
}

// G-stable line in (Z/p)^2, if any
std::optional<std::pair<residue_t, residue_t>> stable_line(const Subgroup& g, residue_t p) {
    // lines: (1, t) for t in [0,p) and (0,1)
    std::vector<std::pair<residue_t, residue_t>> lines;
    for (residue_t t = 0; t < p; ++t) lines.emplace_back(1, t);
    lines.emplace_back(0, 1);
    for (auto& [u, v] : lines) {
        bool ok = true;
        for (auto& gg : g.generators()) {
            std::uint64_t x = (std::uint64_t(gg.a) * u + std::uint64_t(gg.b) * v) % p;
            std::uint64_t y = (std::uint64_t(gg.c) * u + std::uint64_t(gg.d) * v) % p;
            // (x,y) parallel to (u,v): x*v == y*u mod p
            if ((x * v) % p != (y * u) % p) {
                ok = false;
                break;
            }
        }
        if (ok) return std::make_pair(u, v);
    }
    return std::nullopt;
}

// maximal subgroups of an upper-triangularizable group at prime modulus:
// split along the unipotent radical U and the abelian diagonal quotient
std::vector<MaximalSubgroup> maximal_borel_prime(const Subgroup& g, residue_t p,
                                                 const std::pair<residue_t, residue_t>& line) {
    // conjugate the stable line onto e1
    auto [u, v] = line;
    Mat2 c = (v == 0) ? Mat2::identity(p)
                      : (u == 0 ? Mat2(p, 0, 1, 1, 0) : Mat2(p, u, 0, v, 1));
    Mat2 ci = mat_inv(c);
    Subgroup t = conjugate_subgroup(g, ci);  // now upper triangular
    for (auto& gg : t.generators())
        if (gg.c != 0) throw std::logic_error("maximal_borel_prime: triangularization failed");

    const ElementList& tel = t.elements();
    // V = T cap U
    std::vector<packed_t> v_elems;
    for (residue_t b = 0; b < p; ++b) {
        packed_t x = Mat2(p, 1, b, 0, 1).pack();
        if (tel.contains(x)) v_elems.push_back(x);
    }
    std::vector<MaximalSubgroup> out;

    auto diag_of = [&](const Mat2& m) { return Mat2(p, m.a, 0, 0, m.d); };

    if (v_elems.size() == 1) {
        // T embeds in the torus: abelian
        out = maximal_abelian(t);
        for (auto& m : out) m.group = conjugate_subgroup(m.group, c);
        return out;
    }

    // quotient Q = diagonal image
    std::vector<Mat2> qgens;
    std::vector<Mat2> tlifts;
    for (auto& gg : t.generators()) {
        Mat2 dq = diag_of(gg);
        if (!dq.is_identity()) {
            qgens.push_back(dq);
            tlifts.push_back(gg);
        }
    }
    Subgroup q(p, qgens);
    const ElementList& qel = q.elements();

    // type (a): preimages of maximal subgroups of the abelian quotient
    for (auto& um : maximal_abelian(q)) {
        std::vector<Mat2> gens;
        for (auto& ug : um.group.generators()) {
            bool found = false;
            for (packed_t tv : tel.elems) {
                Mat2 m = Mat2::unpack(tv, p);
                if (m.a == ug.a && m.d == ug.d) {
                    gens.push_back(m);
                    found = true;
                    break;
                }
            }
            if (!found) throw std::logic_error("maximal_borel_prime: no preimage in T");
        }
        for (packed_t kv : v_elems) gens.push_back(Mat2::unpack(kv, p));
        out.push_back({Subgroup(p, std::move(gens)), um.index});
    }

    // type (b): complements of U in T via the one-dimensional cocycle system
    if (!qgens.empty()) {
        auto qpos = [&](packed_t x) {
            auto it = std::lower_bound(qel.elems.begin(), qel.elems.end(), x);
            if (it == qel.elems.end() || *it != x)
                throw std::logic_error("maximal_borel_prime: element outside Q");
            return std::size_t(it - qel.elems.begin());
        };
        std::size_t ng = qgens.size();
        LinearSystem sys{p, ng, {}};
        bool consistent = true;

        struct Aff {
            std::vector<residue_t> mat;  // ng coefficients
            residue_t cst = 0;
            bool defined = false;
        };
        std::vector<Aff> wq(qel.elems.size());
        std::vector<packed_t> lift_of(qel.elems.size());
        std::size_t id_idx = qpos(Mat2::identity(p).pack());
        wq[id_idx].defined = true;
        wq[id_idx].mat.assign(ng, 0);
        lift_of[id_idx] = Mat2::identity(p).pack();

        auto ucoord = [&](packed_t x) {
            Mat2 m = Mat2::unpack(x, p);
            if (m.a != 1 || m.d != 1 || m.c != 0)
                throw std::logic_error("maximal_borel_prime: discrepancy outside U");
            return m.b;
        };
        // action of conjugation by g^{-1} on the coordinate of U
        auto uact_inv = [&](const Mat2& gg) {
            Mat2 w = mat_conj(mat_inv(gg), Mat2(p, 1, 1, 0, 1));
            return w.b;  // multiplier
        };
        std::vector<residue_t> act_inv;
        for (auto& gg : tlifts) act_inv.push_back(uact_inv(gg));

        std::vector<std::size_t> queue{id_idx};
        for (std::size_t qi = 0; qi < queue.size() && consistent; ++qi) {
            std::size_t cur = queue[qi];
            packed_t qcur = qel.elems[cur];
            packed_t lcur = lift_of[cur];
            for (std::size_t gi = 0; gi < ng && consistent; ++gi) {
                packed_t qnext = packed_mul(qcur, qgens[gi].pack(), p);
                std::size_t nxt = qpos(qnext);
                packed_t lvia = packed_mul(lcur, tlifts[gi].pack(), p);
                // rhs = delta + act_inv[gi] * w(cur) + v_gi
                auto make_rhs = [&](residue_t delta) {
                    Aff r;
                    r.defined = true;
                    r.mat.assign(ng, 0);
                    for (std::size_t uidx = 0; uidx < ng; ++uidx)
                        r.mat[uidx] = residue_t(std::uint64_t(act_inv[gi]) * wq[cur].mat[uidx] % p);
                    r.mat[gi] = residue_t((r.mat[gi] + 1) % p);
                    r.cst = residue_t((std::uint64_t(act_inv[gi]) * wq[cur].cst + delta) % p);
                    return r;
                };
                if (!wq[nxt].defined) {
                    lift_of[nxt] = lvia;
                    wq[nxt] = make_rhs(0);
                    queue.push_back(nxt);
                } else {
                    packed_t delta = packed_mul(mat_inv(Mat2::unpack(lift_of[nxt], p)).pack(), lvia, p);
                    Aff rhs = make_rhs(ucoord(delta));
                    std::vector<residue_t> eq(ng + 1, 0);
                    for (std::size_t uidx = 0; uidx < ng; ++uidx)
                        eq[uidx] = residue_t((rhs.mat[uidx] + std::uint64_t(p) - wq[nxt].mat[uidx]) % p);
                    eq[ng] = residue_t((wq[nxt].cst + std::uint64_t(p) - rhs.cst) % p);
                    if (!sys.add(std::move(eq))) consistent = false;
                }
            }
        }
        if (consistent) {
            auto sols = sys.all_solutions(4096);
            // coboundaries: v_i ~ v_i + (act_inv[i] - 1) * x
            std::vector<residue_t> cob(ng);
            for (std::size_t i = 0; i < ng; ++i) cob[i] = residue_t((act_inv[i] + p - 1) % p);
            std::vector<std::vector<residue_t>> reps;
            std::vector<std::vector<residue_t>> seen;
            for (auto& s : sols) {
                // reduce modulo the coboundary line
                std::vector<residue_t> r = s;
                std::size_t piv = ng;
                for (std::size_t i = 0; i < ng; ++i)
                    if (cob[i]) { piv = i; break; }
                if (piv < ng) {
                    residue_t f = residue_t(std::uint64_t(r[piv]) * inv_mod(cob[piv], p) % p);
                    for (std::size_t i = 0; i < ng; ++i)
                        r[i] = residue_t((r[i] + std::uint64_t(p - f) * cob[i]) % p);
                }
                if (std::find(seen.begin(), seen.end(), r) != seen.end()) continue;
                seen.push_back(r);
                reps.push_back(s);
            }
            for (auto& s : reps) {
                std::vector<Mat2> gens;
                for (std::size_t gi = 0; gi < ng; ++gi)
                    gens.push_back(mat_mul(tlifts[gi], Mat2(p, 1, s[gi], 0, 1)));
                out.push_back({Subgroup(p, std::move(gens)), p});
            }
        }
    }

    // conjugate everything back
    for (auto& m : out) m.group = conjugate_subgroup(m.group, c);
    return out;
}

std::vector<MaximalSubgroup> maximal_rec(const Subgroup& g, residue_t hint) {
    residue_t m = g.modulus();
    std::uint64_t idhash = (hint != 0) ? (reduce(g, hint).element_hash() ^ (std::uint64_t(hint) << 40))
                                       : g.element_hash();
    auto key = std::make_pair(m, idhash);
    {
        auto it = cache().memo.find(key);
        if (it != cache().memo.end()) return it->second;
    }

    std::vector<MaximalSubgroup> out;
    auto fm = Factorization::of(m);
    residue_t step = 0;
    for (auto it = fm.primes.rbegin(); it != fm.primes.rend(); ++it)
        if (it->second >= 2) { step = residue_t(it->first); break; }

    bool prime_level = fm.primes.size() == 1 && fm.primes[0].second == 1;
    std::optional<std::pair<residue_t, residue_t>> line;
    if (!step && prime_level && m > 3) line = stable_line(g, m);

    if (step) {
        out = chief_step(g, step, hint);
    } else if (is_abelian(g)) {
        out = maximal_abelian(g);
    } else if (line) {
        out = maximal_borel_prime(g, m, *line);
    } else if (g.order() <= 4096) {
        out = maximal_from_subgroup_list(g, all_subgroups_small(g));
    } else {
        throw ConstructionFailed("maximal_rec: base case at modulus " + std::to_string(m) +
                                 " of order " + std::to_string(g.order()) +
                                 " exceeds the exhaustive-search budget");
    }

    // exact-duplicate cleanup; the chief recursion itself never repeats a
    // subgroup, so only the enumerated base cases need it
    if (hint == 0) {
        std::vector<MaximalSubgroup> dedup;
        std::vector<std::uint64_t> hashes;
        for (auto& s : out) {
            auto h = s.group.element_hash();
            if (std::find(hashes.begin(), hashes.end(), h) == hashes.end()) {
                hashes.push_back(h);
                dedup.push_back(std::move(s));
            }
        }
        out = std::move(dedup);
    }
    cache().memo[key] = out;
    return out;
}

}  // namespace

std::vector<MaximalSubgroup> maximal_subgroups_finite(const Subgroup& g, residue_t preimage_hint) {
    return maximal_rec(g, preimage_hint);
}

MaximalOpenResult maximal_open_subgroups(const Subgroup& h0, residue_t ambient_modulus,
                                         residue_t level_cap) {
    MaximalOpenResult res;
    // normalization: level | N, prime support of the ambient, ord_2 != 1
    residue_t lvl = level(h0);
    std::uint64_t n = lvl;
    for (auto& [p, e] : Factorization::of(ambient_modulus).primes) {
        (void)e;
        if (n % p != 0) n *= p;
    }
    if (n % 2 == 0 && n % 4 != 0) n *= 2;
    if (n == 1) n = ambient_modulus;  // degenerate: trivial ambient

    Subgroup base = image_at(h0, residue_t(n));
    std::uint64_t base_order = base.order();

    // candidates at n*l per ambient prime; the level-dividing-n maximal
    // subgroups appear in every family as pullbacks from the quotient
    std::vector<std::pair<Subgroup, std::uint64_t>> cands;  // group at level + open order at its modulus
    for (auto& [p, e] : Factorization::of(residue_t(n)).primes) {
        (void)e;
        std::uint64_t big = n * p;
        if (big > 0xffff) throw ModulusMismatch("maximal_open_subgroups: modulus too large");
        Subgroup gup = lift_full_preimage(base, residue_t(big));
        std::uint64_t gup_order = base_order * (gl2_order(big) / gl2_order(residue_t(n)));
        for (auto& m : maximal_subgroups_finite(gup, residue_t(n))) {
            std::uint64_t morder = gup_order / m.index;
            Subgroup ml = at_level_given_order(m.group, morder);
            if (level_cap && ml.modulus() > level_cap) continue;
            std::uint64_t mlorder = morder / (gl2_order(residue_t(big)) / gl2_order(ml.modulus()));
            cands.emplace_back(std::move(ml), mlorder);
        }
    }

    // dedup up to ambient conjugacy at a common modulus; groups too large to
    // enumerate are kept as-is (callers discard or dedup them after their own
    // level filtering)
    constexpr std::uint64_t kConjugacyDedupCap = 2'000'000;
    std::vector<Subgroup> nodes;
    std::vector<std::uint64_t> orders;
    for (auto& [cl, cord] : cands) {
        bool dup = false;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].modulus() != cl.modulus()) continue;
            if (orders[i] != cord) continue;
            if (cl.modulus() == 1) { dup = true; break; }
            if (cord <= kConjugacyDedupCap && is_conjugate(cl, nodes[i])) { dup = true; break; }
        }
        if (!dup) {
            nodes.push_back(cl);
            orders.push_back(cord);
        }
    }
    res.subgroups = std::move(nodes);
    return res;
}

bool certify_maximal(const Subgroup& h0, const Subgroup& m, unsigned trials, std::uint64_t seed) {
    // compare at a common modulus
    std::uint64_t joint = std::uint64_t(h0.modulus()) / gcd_u64(h0.modulus(), m.modulus()) * m.modulus();
    Subgroup h = image_at(h0, residue_t(joint));
    Subgroup mm = image_at(m, residue_t(joint));
    const auto& he = h.elements();
    const auto& me = mm.elements();
    if (me.size() >= he.size()) return false;
    // M must be contained in H0
    for (auto& g : mm.generators())
        if (!he.contains(g.pack())) return false;

    std::uint64_t idx = he.size() / me.size();
    auto fidx = Factorization::of(idx);
    bool prime_index = fidx.primes.size() == 1 && fidx.primes[0].second == 1;
    if (prime_index) return true;  // any strict overgroup is H0 itself

    std::mt19937_64 rng(seed);
    for (unsigned t = 0; t < trials; ++t) {
        packed_t h_elt;
        do {
            h_elt = he.elems[rng() % he.size()];
        } while (me.contains(h_elt));
        std::vector<Mat2> gens = mm.generators();
        gens.push_back(Mat2::unpack(h_elt, residue_t(joint)));
        ElementList join = closure(residue_t(joint), gens, me.elems);
        if (join.size() != he.size()) return false;
    }
    return true;
}

}  // namespace gl2
