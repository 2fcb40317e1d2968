#include "gl2/lattice.hpp"

#include <algorithm>

#include "gl2/conjugacy.hpp"
#include "gl2/constructions.hpp"
#include "gl2/goursat.hpp"
#include "gl2/maximal.hpp"

namespace gl2 {

std::vector<std::size_t> Lattice::inf_nodes() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].verdict.value == Finiteness::Infinite) out.push_back(i);
    return out;
}

std::vector<std::size_t> Lattice::fin_nodes() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].verdict.value == Finiteness::Finite) out.push_back(i);
    return out;
}

bool classes_equal(const Subgroup& a, const Subgroup& b) {
    if (a.modulus() == 1 || b.modulus() == 1) {
        if (a.modulus() != b.modulus()) return false;
        return true;
    }
    std::uint64_t joint = std::uint64_t(a.modulus()) / gcd_u64(a.modulus(), b.modulus()) * b.modulus();
    Subgroup aj = image_at(a, residue_t(joint));
    Subgroup bj = image_at(b, residue_t(joint));
    if (aj.order() != bj.order()) return false;
    return is_conjugate(aj, bj);
}

bool class_contained(const Subgroup& a, const Subgroup& b) {
    if (a.modulus() == 1) return true;  // only the full group has modulus 1 here
    std::uint64_t joint = std::uint64_t(a.modulus()) / gcd_u64(a.modulus(), b.modulus()) * b.modulus();
    if (joint > 0xffff) throw ModulusMismatch("class_contained: joint modulus too large");
    Subgroup aj = image_at(a, residue_t(joint));
    Subgroup bj = image_at(b, residue_t(joint));
    if (bj.order() % aj.order() != 0) return false;
    return conjugate_subgroup_of(aj, bj);
}

namespace {

// 2-adic / 3-adic projection of a {2,3}-level group, presented at its level
Subgroup primary_projection(const Subgroup& g, residue_t prime) {
    residue_t q = residue_t(Factorization::of(g.modulus()).prime_power(prime));
    if (q == 1) return Subgroup(1, {});  // projection is the full group
    return at_level(reduce(g, q));
}

bool whitelist_match(const Subgroup& proj, const std::vector<Subgroup>& wl) {
    for (auto& w : wl) {
        if (w.modulus() != proj.modulus()) continue;
        if (proj.modulus() == 1) return true;
        if (w.order() != proj.order()) continue;
        if (is_conjugate(proj, w)) return true;
    }
    return false;
}

struct NodeScratch {
    std::uint64_t level = 1;
    std::uint64_t order_at_6lcm = 1;  // order at lcm(level, 6) for fast filtering
    std::uint64_t hist_hash = 0;
};

std::uint64_t projection_hist_hash(const Subgroup& g) {
    if (g.modulus() == 1) return 1;
    auto h = trace_det_histogram(g);
    std::uint64_t acc = g.modulus();
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h[i]) acc = acc * 1099511628211ull + (i << 20) + h[i];
    return acc;
}

}  // namespace

Lattice build_lattice(unsigned p, const Subgroup& k, const ProjectionWhitelist& wl,
                      const RankOracle& oracle, const RunConfig& cfg) {
    Lattice lat;
    lat.p = p;
    lat.k_label = k.label();

    Subgroup kl = at_level(k);

    auto make_node = [&](const Subgroup& g) {
        LatticeNode node;
        node.group = at_level(g);
        node.group_level = node.group.modulus();
        node.fiber = fiber_invariants(node.group.modulus() == 1 ? Subgroup::full(6) : node.group, kl);
        node.fiber_key = fiber_curve_key(node.group, kl);
        node.verdict = finiteness(node.fiber_key, node.fiber, oracle);
        return node;
    };

    lat.nodes.push_back(make_node(Subgroup::full(6)));
    std::vector<NodeScratch> scratch;
    {
        NodeScratch s;
        s.level = 1;
        s.order_at_6lcm = gl2_order(6);
        s.hist_hash = 1;
        scratch.push_back(s);
    }

    std::vector<std::size_t> queue;
    if (lat.nodes[0].verdict.value == Finiteness::Infinite) queue.push_back(0);
    if (lat.nodes[0].verdict.value == Finiteness::Unknown) lat.has_unknown = true;

    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        std::size_t parent = queue[qi];
        Subgroup h0 = lat.nodes[parent].group.modulus() == 1 ? Subgroup::full(6)
                                                             : lat.nodes[parent].group;
        auto maxres = maximal_open_subgroups(h0, 6);
        for (auto& m : maxres.subgroups) {
            const Subgroup& ml = m;  // already presented at its level
            residue_t mod6 = ml.modulus() == 1 ? 6 : ml.modulus();
            Subgroup m6 = image_at(ml, mod6);
            if (!m6.contains_minus_I()) continue;
            if (!m6.det_image_full()) continue;
            Subgroup p2 = primary_projection(m6, 2);
            if (!whitelist_match(p2, wl.two_adic)) continue;
            Subgroup p3 = primary_projection(m6, 3);
            if (!whitelist_match(p3, wl.three_adic)) continue;
            if (cfg.certify_trials && !certify_maximal(h0, ml, cfg.certify_trials))
                throw std::logic_error("maximality certification failed under " +
                                       std::to_string(parent));

            NodeScratch cand;
            cand.level = ml.modulus();
            cand.order_at_6lcm = image_at(ml, residue_t(std::uint64_t(mod6) / gcd_u64(mod6, 6) * 6)).order();
            cand.hist_hash = projection_hist_hash(ml);

            std::size_t found = SIZE_MAX;
            for (std::size_t i = 0; i < lat.nodes.size(); ++i) {
                if (scratch[i].level != cand.level) continue;
                if (scratch[i].hist_hash != cand.hist_hash) continue;
                if (classes_equal(lat.nodes[i].group, ml)) {
                    found = i;
                    break;
                }
            }
            if (found != SIZE_MAX) {
                auto& par = lat.nodes[found].parents;
                if (std::find(par.begin(), par.end(), parent) == par.end()) par.push_back(parent);
                continue;
            }
            LatticeNode node = make_node(ml);
            node.parents.push_back(parent);
            lat.nodes.push_back(std::move(node));
            scratch.push_back(cand);
            std::size_t idx = lat.nodes.size() - 1;
            switch (lat.nodes[idx].verdict.value) {
                case Finiteness::Infinite:
                    queue.push_back(idx);
                    break;
                case Finiteness::Unknown:
                    lat.has_unknown = true;
                    break;
                case Finiteness::Finite:
                    break;
            }
        }
    }

    color_lattice(lat);
    return lat;
}

std::vector<std::size_t> color_lattice(Lattice& lat) {
    std::vector<std::size_t> fins = lat.fin_nodes();
    std::vector<std::size_t> gray;
    for (std::size_t i : lat.inf_nodes()) lat.nodes[i].color = NodeColor::Inf;
    for (std::size_t i : fins) {
        bool maximal = true;
        for (std::size_t j : fins) {
            if (i == j) continue;
            if (lat.nodes[i].group_level == lat.nodes[j].group_level &&
                lat.nodes[i].fiber_key.str() == lat.nodes[j].fiber_key.str())
                continue;  // same class cannot occur twice, but guard anyway
            Subgroup a = lat.nodes[i].group.modulus() == 1 ? Subgroup::full(6) : lat.nodes[i].group;
            Subgroup b = lat.nodes[j].group.modulus() == 1 ? Subgroup::full(6) : lat.nodes[j].group;
            if (lat.nodes[j].fiber.psl2_index % lat.nodes[i].fiber.psl2_index != 0 &&
                lat.nodes[i].fiber.psl2_index % lat.nodes[j].fiber.psl2_index != 0)
                continue;
            if (lat.nodes[i].fiber.psl2_index <= lat.nodes[j].fiber.psl2_index) continue;
            if (class_contained(a, b)) {
                maximal = false;
                break;
            }
        }
        lat.nodes[i].color = maximal ? NodeColor::FinMaximal : NodeColor::FinNonmaximal;
        if (maximal) gray.push_back(i);
    }
    return gray;
}

namespace {
// process-wide memo: the same groups recur across lattice runs
std::map<std::pair<residue_t, std::uint64_t>, std::uint64_t>& comm6_memo() {
    static std::map<std::pair<residue_t, std::uint64_t>, std::uint64_t> m;
    return m;
}
}  // namespace

std::set<std::uint64_t> commutator_index_set(Lattice& lat, bool infinite_side, const RunConfig& cfg) {
    std::set<std::uint64_t> out;
    for (auto i : (infinite_side ? lat.inf_nodes() : lat.fin_nodes())) {
        auto& node = lat.nodes[i];
        if (node.commutator_index6 == 0) {
            Subgroup g = node.group.modulus() == 1 ? Subgroup::full(6) : node.group;
            auto key = std::make_pair(g.modulus(), g.element_hash());
            auto it = comm6_memo().find(key);
            if (it != comm6_memo().end()) {
                node.commutator_index6 = it->second;
            } else {
                node.commutator_index6 = commutator_index_6adic(g, cfg.stab).index_in_sl2;
                comm6_memo()[key] = node.commutator_index6;
            }
        }
        out.insert(node.commutator_index6);
    }
    return out;
}

GridReport product_grid(unsigned p, const std::vector<Subgroup>& l2, const std::vector<Subgroup>& l3,
                        const RankOracle& oracle, const RunConfig& cfg) {
    if (p != 2 && p != 3) throw std::invalid_argument("product_grid: p must be 2 or 3");
    GridReport rep;
    rep.p = p;

    // per-factor commutator data: stabilized index and the commutator group
    struct FactorData {
        std::uint64_t index = 1;
        Subgroup commutator;  // at the stabilized modulus
        Subgroup commutator_up;  // one level higher, for the stability check
    };
    auto factor_data = [&](const Subgroup& g, residue_t ell) {
        FactorData fd;
        Subgroup base = g.modulus() == 1 ? Subgroup::full(ell == 2 ? 4 : 9) : g;
        auto repv = commutator_index_padic(base, ell, cfg.stab);
        fd.index = repv.index_in_sl2;
        auto com = commutator_subgroup(image_at(base, repv.stabilized_modulus), cfg.closure_cap);
        fd.commutator = subgroup_from_elements(repv.stabilized_modulus, com.elems.elems);
        if (cfg.delta_stability_check) {
            residue_t up = residue_t(repv.stabilized_modulus * ell);
            auto comup = commutator_subgroup(image_at(base, up), cfg.closure_cap);
            fd.commutator_up = subgroup_from_elements(up, comup.elems.elems);
        }
        return fd;
    };

    std::vector<FactorData> f2, f3;
    for (auto& h : l2) f2.push_back(factor_data(h, 2));
    for (auto& k : l3) f3.push_back(factor_data(k, 3));
    for (auto& f : f2) rep.idx2.push_back(f.index);
    for (auto& f : f3) rep.idx3.push_back(f.index);

    // verdicts per product
    for (std::size_t hi = 0; hi < l2.size(); ++hi) {
        for (std::size_t ki = 0; ki < l3.size(); ++ki) {
            GridProduct gp;
            gp.hi = hi;
            gp.ki = ki;
            Subgroup h = l2[hi].modulus() == 1 ? Subgroup::full(2) : l2[hi];
            Subgroup k = l3[ki].modulus() == 1 ? Subgroup::full(3) : l3[ki];
            gp.fiber = fiber_invariants(h, k);
            gp.key = fiber_curve_key(h, k);
            gp.verdict = finiteness(gp.key, gp.fiber, oracle);
            if (gp.verdict.value == Finiteness::Unknown) rep.has_unknown = true;
            rep.products.push_back(std::move(gp));
        }
    }

    // containment posets on the factor lists (conjugate containment)
    auto poset = [&](const std::vector<Subgroup>& list) {
        std::vector<std::vector<bool>> le(list.size(), std::vector<bool>(list.size(), false));
        for (std::size_t i = 0; i < list.size(); ++i)
            for (std::size_t j = 0; j < list.size(); ++j) {
                if (i == j) {
                    le[i][j] = true;
                    continue;
                }
                const Subgroup& a = list[i];
                const Subgroup& b = list[j];
                std::uint64_t oa = a.modulus() == 1 ? 1 : 0;  // placeholder, computed below
                (void)oa;
                le[i][j] = class_contained(a, b);
            }
        return le;
    };
    auto le2 = poset(l2);
    auto le3 = poset(l3);

    // maximal finite products
    for (auto& gp : rep.products) {
        if (gp.verdict.value != Finiteness::Finite) continue;
        bool maximal = true;
        for (auto& other : rep.products) {
            if (&other == &gp) continue;
            if (other.verdict.value != Finiteness::Finite) continue;
            if (le2[gp.hi][other.hi] && le3[gp.ki][other.ki] &&
                !(gp.hi == other.hi && gp.ki == other.ki)) {
                maximal = false;
                break;
            }
        }
        gp.maximal_finite = maximal;
        if (maximal) ++rep.maximal_finite_count;
    }

    // entanglement factors over the infinite products
    for (auto& gp : rep.products) {
        if (gp.verdict.value != Finiteness::Infinite) continue;
        ++rep.infinite_count;
        auto common = common_quotient_orders(f2[gp.hi].commutator, f3[gp.ki].commutator, 512);
        if (cfg.delta_stability_check) {
            auto common_up = common_quotient_orders(f2[gp.hi].commutator_up, f3[gp.ki].commutator_up, 512);
            std::set<std::uint64_t> s1, s2;
            for (auto& [q, w] : common) s1.insert(q);
            for (auto& [q, w] : common_up) s2.insert(q);
            if (s1 != s2)
                throw StabilizationFailed("entanglement factors unstable across one level");
        }
        for (auto& [q, w] : common) {
            gp.delta_set.insert(q);
            rep.delta_by_k[gp.ki].insert(q);
            rep.delta_all.insert(q);
            rep.candidate_indices.insert(f2[gp.hi].index * f3[gp.ki].index * q);
        }
    }
    return rep;
}

std::vector<Subgroup> open_subgroup_tree(const Subgroup& root, residue_t ambient,
                                         std::uint64_t index_bound, residue_t level_bound) {
    std::vector<Subgroup> nodes;
    std::vector<std::uint64_t> hist;
    std::vector<std::size_t> queue;

    std::uint64_t root_index;
    {
        Subgroup rl = at_level(root);
        residue_t m = rl.modulus() == 1 ? ambient : rl.modulus();
        root_index = gl2_order(m) / image_at(rl, m).order();
        nodes.push_back(rl);
        hist.push_back(projection_hist_hash(rl));
        queue.push_back(0);
    }
    (void)root_index;

    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        Subgroup h0 = nodes[queue[qi]].modulus() == 1 ? Subgroup::full(ambient) : nodes[queue[qi]];
        auto maxres = maximal_open_subgroups(h0, ambient, level_bound);
        for (auto& m : maxres.subgroups) {
            // results are already presented at their level
            if (m.modulus() > level_bound) continue;
            const Subgroup& ml = m;
            residue_t mm = ml.modulus() == 1 ? ambient : ml.modulus();
            Subgroup mp = image_at(ml, mm);
            if (!mp.contains_minus_I()) continue;
            if (!mp.det_image_full()) continue;
            std::uint64_t idx = gl2_order(mm) / mp.order();
            if (idx > index_bound) continue;
            std::uint64_t hh = projection_hist_hash(ml);
            bool dup = false;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                if (nodes[i].modulus() != ml.modulus() || hist[i] != hh) continue;
                if (classes_equal(nodes[i], ml)) {
                    dup = true;
                    break;
                }
            }
            if (dup) continue;
            nodes.push_back(ml);
            hist.push_back(hh);
            queue.push_back(nodes.size() - 1);
        }
    }
    return nodes;
}

std::vector<Subgroup> match_class_specs(const std::vector<Subgroup>& tree,
                                        const std::vector<ClassSpec>& specs, bool* exact) {
    bool ok = true;
    std::vector<Subgroup> out;
    for (auto& spec : specs) {
        std::vector<Subgroup> matches;
        for (auto& g : tree) {
            if (g.modulus() != spec.level) continue;
            if (spec.level == 1) {
                matches.push_back(g);
                continue;
            }
            CurveInvariants inv = curve_invariants(g);
            if (inv.psl2_index == spec.index && inv.genus == spec.genus) matches.push_back(g);
        }
        if (matches.size() != spec.count) ok = false;
        for (auto& m : matches) out.push_back(m);
    }
    if (exact) *exact = ok;
    return out;
}

}  // namespace gl2
