// Offline generator for the fixture data under data/: admissible-image
// whitelists, rank oracle files, and the appendix catalogs.  The selection of
// same-invariant classes is driven by the downstream constants (lattice node
// counts, gray multisets, commutator index sets), printed on stdout for
// review before the data is frozen.

#include <cstdio>
#include <cstring>
#include <map>
#include <set>
#include <string>

#include "gl2/adelic.hpp"
#include "gl2/commutator.hpp"
#include "gl2/conjugacy.hpp"
#include "gl2/constructions.hpp"
#include "gl2/curve.hpp"
#include "gl2/goursat.hpp"
#include "gl2/io.hpp"
#include "gl2/lattice.hpp"
#include "gl2/maximal.hpp"

using namespace gl2;

namespace {

struct GraySpec {
    std::uint64_t level, index, genus;
    unsigned count;
};

// expected constants per lattice
struct LatticeSpec {
    unsigned p;
    std::string k_name;
    std::size_t inf_count;
    std::size_t gray_count;
    std::set<std::uint64_t> inf_commutators;
    std::vector<GraySpec> grays;  // fiber (level,index,genus) multiset
};

Subgroup k_group(const std::string& name) {
    if (name == "b5") return borel(5);
    if (name == "b7") return borel(7);
    if (name == "b13") return borel(13);
    if (name == "sp5") return cartan(5, CartanKind::Split);
    if (name == "b25") return borel(25);
    throw std::runtime_error("unknown K " + name);
}

std::string describe(const Subgroup& g) {
    if (g.modulus() == 1) return "1.1.0";
    CurveInvariants inv = curve_invariants(g);
    return std::to_string(g.modulus()) + "." + std::to_string(inv.psl2_index) + "." +
           std::to_string(inv.genus);
}

// Builds a lattice with verdicts assigned by the derivation policy; the
// boolean vector chooses among same-class gray candidates when the class
// count is below the number of candidates.
struct DeriveResult {
    Lattice lattice;
    RankOracle oracle;
    bool ok = false;
    std::string reason;
};

DeriveResult derive_lattice_oracle(const LatticeSpec& spec, const ProjectionWhitelist& wl,
                                   const std::vector<std::size_t>& gray_pick) {
    DeriveResult res;
    RankOracle oracle;
    RunConfig cfg;
    cfg.certify_trials = 0;  // the exhaustive certification runs in the test suite
    Subgroup k = k_group(spec.k_name);

    for (int round = 0; round < 12; ++round) {
        Lattice lat = build_lattice(spec.p, k, wl, oracle, cfg);
        // collect unknowns
        std::vector<std::size_t> unknowns;
        for (std::size_t i = 0; i < lat.nodes.size(); ++i)
            if (lat.nodes[i].verdict.value == Finiteness::Unknown) unknowns.push_back(i);
        if (unknowns.empty()) {
            res.lattice = std::move(lat);
            break;
        }
        // policy, one pass
        std::map<std::string, unsigned> gray_budget;  // how many fin slots per class remain
        for (auto& gs : spec.grays) {
            std::string key = std::to_string(gs.level) + "." + std::to_string(gs.index) + "." +
                              std::to_string(gs.genus);
            gray_budget[key] += gs.count;
        }
        // count already-finite nodes against the budget
        for (auto& node : lat.nodes) {
            if (node.verdict.value != Finiteness::Finite) continue;
            if (node.fiber.genus >= 2) continue;  // these are budgeted separately below
            std::string key = std::to_string(node.fiber_key.level) + "." +
                              std::to_string(node.fiber.psl2_index) + "." +
                              std::to_string(node.fiber.genus);
            auto it = gray_budget.find(key);
            if (it != gray_budget.end() && it->second > 0) --it->second;
        }
        for (std::size_t i : unknowns) {
            auto& node = lat.nodes[i];
            std::string kf = node.fiber_key.str();
            if (oracle.lookup(kf)) continue;  // assigned through a same-class batch
            const auto& inv = node.fiber;
            std::string cls = std::to_string(node.fiber_key.level) + "." +
                              std::to_string(inv.psl2_index) + "." + std::to_string(inv.genus);
            if (inv.genus == 0 && inv.rational_cusp_count > 0) {
                oracle.add(kf, Finiteness::Infinite, "genus 0 with a rational cusp");
                continue;
            }
            auto it = gray_budget.find(cls);
            if (it != gray_budget.end() && it->second > 0) {
                // resolve the whole same-class batch at once, deterministically
                std::vector<std::string> cands;
                for (std::size_t j : unknowns) {
                    auto& nj = lat.nodes[j];
                    std::string cj = std::to_string(nj.fiber_key.level) + "." +
                                     std::to_string(nj.fiber.psl2_index) + "." +
                                     std::to_string(nj.fiber.genus);
                    if (cj == cls && !oracle.lookup(nj.fiber_key.str()))
                        cands.push_back(nj.fiber_key.str());
                }
                std::sort(cands.begin(), cands.end());
                unsigned budget = it->second;
                if (cands.size() > budget)
                    fprintf(stderr, "  [class %s: %zu candidates for %u gray slots]\n", cls.c_str(),
                            cands.size(), budget);
                // scheme 0: first `budget` candidates finite; scheme 1: last ones
                std::size_t scheme = gray_pick.empty() ? 0 : gray_pick[0];
                for (std::size_t r = 0; r < cands.size(); ++r) {
                    bool fin;
                    if (cands.size() <= budget) {
                        fin = true;
                    } else if (scheme == 0) {
                        fin = r < budget;
                    } else {
                        fin = r + budget >= cands.size();
                    }
                    oracle.add(cands[r], fin ? Finiteness::Finite : Finiteness::Infinite, "rank data");
                    if (fin && it->second > 0) --it->second;
                }
                continue;
            }
            // containment in an already-finite node
            bool contained = false;
            for (auto& other : lat.nodes) {
                if (other.verdict.value != Finiteness::Finite) continue;
                Subgroup a = node.group.modulus() == 1 ? Subgroup::full(6) : node.group;
                Subgroup b = other.group.modulus() == 1 ? Subgroup::full(6) : other.group;
                if (node.fiber.psl2_index <= other.fiber.psl2_index) continue;
                if (class_contained(a, b)) { contained = true; break; }
            }
            if (contained) {
                oracle.add(kf, Finiteness::Finite, "covered by a finite curve");
            } else {
                oracle.add(kf, Finiteness::Infinite, "rank data");
            }
        }
    }

    Lattice& lat = res.lattice;
    if (lat.nodes.empty() || lat.has_unknown) {
        res.reason = "build incomplete";
        return res;
    }
    // validation
    auto gray = color_lattice(lat);
    std::size_t inf = lat.inf_nodes().size();
    if (inf != spec.inf_count) {
        res.reason = "inf count " + std::to_string(inf) + " != " + std::to_string(spec.inf_count);
        res.oracle = oracle;
        return res;
    }
    if (gray.size() != spec.gray_count) {
        res.reason = "gray count " + std::to_string(gray.size()) + " != " + std::to_string(spec.gray_count);
        res.oracle = oracle;
        return res;
    }
    std::multiset<std::string> want, got;
    for (auto& gs : spec.grays)
        for (unsigned c = 0; c < gs.count; ++c)
            want.insert(std::to_string(gs.level) + "." + std::to_string(gs.index) + "." +
                        std::to_string(gs.genus));
    for (auto gi : gray)
        got.insert(std::to_string(lat.nodes[gi].fiber_key.level) + "." +
                   std::to_string(lat.nodes[gi].fiber.psl2_index) + "." +
                   std::to_string(lat.nodes[gi].fiber.genus));
    if (want != got) {
        res.reason = "gray class multiset mismatch";
        res.oracle = oracle;
        return res;
    }
    RunConfig cfg2;
    auto iset = commutator_index_set(lat, true, cfg2);
    if (iset != spec.inf_commutators) {
        res.reason = "inf commutator set mismatch";
        res.oracle = oracle;
        return res;
    }
    res.oracle = oracle;
    res.ok = true;
    return res;
}

std::vector<Subgroup> label_groups(const std::vector<Subgroup>& tree, residue_t level,
                                   std::uint64_t index, std::uint64_t genus) {
    std::vector<Subgroup> out;
    for (auto& g : tree) {
        if (g.modulus() != level) continue;
        if (level == 1) {
            out.push_back(g);
            continue;
        }
        CurveInvariants inv = curve_invariants(g);
        if (inv.psl2_index == index && inv.genus == genus) out.push_back(g);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::string mode = argc > 1 ? argv[1] : "";

    if (mode == "padic") {
        // unambiguous p-adic whitelists
        struct Spec {
            const char* file;
            residue_t root_p;
            std::uint64_t idx_bound;
            residue_t lvl_bound;
        };
        for (auto& s : {Spec{"wl_5adic.txt", 5, 60, 25}, Spec{"wl_7adic.txt", 7, 24, 7},
                        Spec{"wl_13adic.txt", 13, 42, 13}}) {
            auto tree = open_subgroup_tree(borel(s.root_p), s.root_p, s.idx_bound, s.lvl_bound);
            std::vector<Subgroup> out;
            int i = 0;
            for (auto& g : tree) {
                Subgroup gg = g;
                gg.set_label("p" + std::to_string(s.root_p) + "_" + std::to_string(i++) + "_" +
                             describe(g));
                out.push_back(gg);
                printf("%s: %s order=%llu\n", s.file, describe(g).c_str(),
                       (unsigned long long)gg.order());
            }
            write_group_file(data_path(std::string("whitelists/") + s.file), out,
                             "admissible p-adic images (all classes with the listed invariants)");
        }
        return 0;
    }

    if (mode == "pool") {
        // candidate pools for the 2-adic and 3-adic selections
        auto t2 = open_subgroup_tree(Subgroup::full(2), 2, 12, 8);
        auto t3 = open_subgroup_tree(Subgroup::full(3), 3, 36, 27);
        std::vector<Subgroup> o2, o3;
        int i = 0;
        for (auto& g : t2) {
            Subgroup gg = g;
            gg.set_label("c2_" + std::to_string(i++) + "_" + describe(g) + "_h" +
                         std::to_string(curve_key(g).inv_hash % 1000000));
            o2.push_back(gg);
        }
        i = 0;
        for (auto& g : t3) {
            Subgroup gg = g;
            gg.set_label("c3_" + std::to_string(i++) + "_" + describe(g) + "_h" +
                         std::to_string(curve_key(g).inv_hash % 1000000));
            o3.push_back(gg);
        }
        write_group_file(data_path("whitelists/pool_2adic.txt"), o2, "2-adic candidate classes");
        write_group_file(data_path("whitelists/pool_3adic.txt"), o3, "3-adic candidate classes");
        for (auto& g : o2) printf("2: %s\n", g.label().c_str());
        for (auto& g : o3) printf("3: %s\n", g.label().c_str());
        return 0;
    }

    if (mode == "lat13") {
        // choice bits: argv[2] = which 8.2.0 class (0/1), argv[3] = gray pick index
        auto pool = parse_group_file(data_path("whitelists/pool_2adic.txt"));
        std::vector<Subgroup> cands820 = label_groups(pool, 8, 2, 0);
        printf("8.2.0 candidates: %zu\n", cands820.size());
        int which = argc > 2 ? atoi(argv[2]) : 0;
        int pick = argc > 3 ? atoi(argv[3]) : 0;
        ProjectionWhitelist wl;
        wl.two_adic.push_back(Subgroup(1, {}));
        wl.two_adic.push_back(cands820[which]);
        wl.three_adic.push_back(Subgroup(1, {}));

        LatticeSpec spec{13, "b13", 5, 2, {2}, {{78, 84, 5, 1}, {312, 28, 1, 1}}};
        auto res = derive_lattice_oracle(spec, wl, {std::size_t(pick)});
        printf("which=%d pick=%d -> %s %s\n", which, pick, res.ok ? "OK" : "FAIL",
               res.reason.c_str());
        if (res.ok) {
            for (std::size_t i = 0; i < res.lattice.nodes.size(); ++i) {
                auto& n = res.lattice.nodes[i];
                printf("  node %zu: H=%s fiber=%llu.%llu.%llu %s color=%d\n", i,
                       describe(n.group.modulus() == 1 ? Subgroup::full(6) : n.group).c_str(),
                       (unsigned long long)n.fiber_key.level, (unsigned long long)n.fiber.psl2_index,
                       (unsigned long long)n.fiber.genus,
                       n.verdict.value == Finiteness::Infinite ? "inf" : "fin", int(n.color));
            }
        }
        return res.ok ? 0 : 1;
    }

    if (mode == "lat7") {
        auto pool = parse_group_file(data_path("whitelists/pool_2adic.txt"));
        auto c480 = label_groups(pool, 4, 8, 0);
        int which = argc > 2 ? atoi(argv[2]) : 0;
        int pick = argc > 3 ? atoi(argv[3]) : 0;
        ProjectionWhitelist wl;
        wl.two_adic.push_back(Subgroup(1, {}));
        for (auto& g : label_groups(pool, 2, 2, 0)) wl.two_adic.push_back(g);
        for (auto& g : label_groups(pool, 4, 2, 0)) wl.two_adic.push_back(g);
        for (auto& g : label_groups(pool, 8, 2, 0)) wl.two_adic.push_back(g);
        wl.two_adic.push_back(c480[which]);
        auto pool3 = parse_group_file(data_path("whitelists/pool_3adic.txt"));
        wl.three_adic.push_back(Subgroup(1, {}));
        for (auto& g : label_groups(pool3, 3, 4, 0)) wl.three_adic.push_back(g);

        LatticeSpec spec{7, "b7", 9, 4, {2, 4, 12},
                         {{21, 32, 1, 1}, {28, 64, 3, 1}, {42, 48, 2, 1}, {126, 48, 2, 1}}};
        auto res = derive_lattice_oracle(spec, wl, {std::size_t(pick)});
        printf("lat7 which=%d pick=%d -> %s %s nodes=%zu\n", which, pick, res.ok ? "OK" : "FAIL",
               res.reason.c_str(), res.lattice.nodes.size());
        if (res.ok && argc > 4 && std::string(argv[4]) == "save") {
            res.oracle.save_file(data_path("oracles/oracle_lat7.txt"));
            std::vector<Subgroup> out = wl.two_adic;
            for (std::size_t i = 0; i < out.size(); ++i) out[i].set_label("w2_" + std::to_string(i));
            write_group_file(data_path("whitelists/wl_p7_2adic.txt"), out, "admissible 2-adic images, 7-isogeny");
            out = wl.three_adic;
            for (std::size_t i = 0; i < out.size(); ++i) out[i].set_label("w3_" + std::to_string(i));
            write_group_file(data_path("whitelists/wl_p7_3adic.txt"), out, "admissible 3-adic images, 7-isogeny");
        }
        if (res.ok) {
            for (std::size_t i = 0; i < res.lattice.nodes.size(); ++i) {
                auto& n = res.lattice.nodes[i];
                printf("  node %zu: H=%s fiber=%llu.%llu.%llu %s color=%d\n", i,
                       describe(n.group.modulus() == 1 ? Subgroup::full(6) : n.group).c_str(),
                       (unsigned long long)n.fiber_key.level, (unsigned long long)n.fiber.psl2_index,
                       (unsigned long long)n.fiber.genus,
                       n.verdict.value == Finiteness::Infinite ? "inf" : "fin", int(n.color));
            }
        }
        return res.ok ? 0 : 1;
    }

    if (mode == "lat5") {
        auto pool = parse_group_file(data_path("whitelists/pool_2adic.txt"));
        auto pool3 = parse_group_file(data_path("whitelists/pool_3adic.txt"));
        auto c820 = label_groups(pool, 8, 2, 0);
        auto c860 = label_groups(pool, 8, 6, 0);
        auto c360 = label_groups(pool3, 3, 6, 0);
        int w820 = argc > 2 ? atoi(argv[2]) : 0;
        unsigned mask860 = argc > 3 ? unsigned(atoi(argv[3])) : 0;  // 3 bits set out of 6
        int e360 = argc > 4 ? atoi(argv[4]) : 0;
        int pick = argc > 5 ? atoi(argv[5]) : 0;

        ProjectionWhitelist wl;
        wl.two_adic.push_back(Subgroup(1, {}));
        for (auto& g : label_groups(pool, 2, 3, 0)) wl.two_adic.push_back(g);
        for (auto& g : label_groups(pool, 4, 4, 0)) wl.two_adic.push_back(g);
        wl.two_adic.push_back(c820[w820]);
        for (unsigned b = 0; b < c860.size(); ++b)
            if (mask860 & (1u << b)) wl.two_adic.push_back(c860[b]);
        wl.three_adic.push_back(Subgroup(1, {}));
        for (auto& g : label_groups(pool3, 3, 3, 0)) wl.three_adic.push_back(g);
        for (auto& g : label_groups(pool3, 3, 4, 0)) wl.three_adic.push_back(g);
        wl.three_adic.push_back(c360[e360]);
        for (auto& g : label_groups(pool3, 9, 9, 0)) wl.three_adic.push_back(g);

        LatticeSpec spec{5, "b5", 14, 29, {2, 12},
                         {{15, 24, 1, 1}, {15, 36, 1, 1}, {20, 24, 1, 1}, {30, 12, 1, 1},
                          {30, 36, 1, 2}, {60, 36, 1, 7}, {60, 12, 1, 1}, {120, 36, 1, 8},
                          {120, 12, 1, 1}, {30, 54, 2, 1}, {45, 54, 2, 1}, {120, 36, 3, 2},
                          {120, 72, 3, 2}}};
        auto res = derive_lattice_oracle(spec, wl, {std::size_t(pick)});
        printf("lat5 w820=%d mask=%u e360=%d pick=%d -> %s %s nodes=%zu\n", w820, mask860, e360,
               pick, res.ok ? "OK" : "FAIL", res.reason.c_str(), res.lattice.nodes.size());
        if (res.ok && argc > 6 && std::string(argv[6]) == "save") {
            res.oracle.save_file(data_path("oracles/oracle_lat5_b5.txt"));
            std::vector<Subgroup> out = wl.two_adic;
            for (std::size_t i = 0; i < out.size(); ++i) out[i].set_label("w2_" + std::to_string(i));
            write_group_file(data_path("whitelists/wl_p5_2adic.txt"), out, "admissible 2-adic images, 5-isogeny");
            out = wl.three_adic;
            for (std::size_t i = 0; i < out.size(); ++i) out[i].set_label("w3_" + std::to_string(i));
            write_group_file(data_path("whitelists/wl_p5_3adic.txt"), out, "admissible 3-adic images, 5-isogeny");
        }
        return res.ok ? 0 : 1;
    }

    if (mode == "lat5tree" || mode == "lat7tree" || mode == "lat13tree") {
        // fully permissive whitelists; every genus <= 1 node optimistically
        // expanded; emits the node universe for the offline assignment solve
        unsigned p = mode == "lat5tree" ? 5 : mode == "lat7tree" ? 7 : 13;
        std::string kname = argc > 2 ? argv[2] : (p == 5 ? "b5" : p == 7 ? "b7" : "b13");
        Subgroup k = k_group(kname);
        auto pool2 = parse_group_file(data_path("whitelists/pool_2adic.txt"));
        auto pool3 = parse_group_file(data_path("whitelists/pool_3adic.txt"));

        auto pool_id = [&](const std::vector<Subgroup>& pool, const Subgroup& proj) {
            if (proj.modulus() == 1) return std::string("full");
            for (std::size_t i = 0; i < pool.size(); ++i) {
                if (pool[i].modulus() != proj.modulus()) continue;
                if (pool[i].order() != proj.order()) continue;
                if (is_conjugate(proj, pool[i])) return pool[i].label();
            }
            return std::string("off-pool");
        };

        struct TNode {
            Subgroup group;
            std::string p2, p3;
            CurveKey key;
            CurveInvariants inv;
            std::vector<std::size_t> parents;
            std::uint64_t comm6 = 0;
        };
        std::vector<TNode> nodes;
        Subgroup kl = at_level(k);
        {
            TNode root;
            root.group = Subgroup(1, {});
            root.p2 = "full";
            root.p3 = "full";
            root.inv = curve_invariants(kl);
            root.key = curve_key(kl);
            nodes.push_back(root);
        }
        std::vector<std::size_t> queue{0};
        RunConfig cfg;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            std::size_t pi = queue[qi];
            Subgroup h0 = nodes[pi].group.modulus() == 1 ? Subgroup::full(6) : nodes[pi].group;
            auto maxres = maximal_open_subgroups(h0, 6, 72);
            for (auto& m : maxres.subgroups) {
                if (m.modulus() > 72) continue;
                residue_t mod6 = m.modulus() == 1 ? 6 : m.modulus();
                Subgroup m6 = image_at(m, mod6);
                if (!m6.contains_minus_I()) continue;
                if (!m6.det_image_full()) continue;
                CurveInvariants fib = fiber_invariants(m6, kl);
                if (fib.psl2_index > 80) continue;  // beyond every printed gray class
                CurveKey key = fiber_curve_key(m, kl);
                std::size_t found = SIZE_MAX;
                for (std::size_t i = 0; i < nodes.size(); ++i) {
                    if (nodes[i].key.str() == key.str() &&
                        classes_equal(nodes[i].group, m)) {
                        found = i;
                        break;
                    }
                }
                if (found != SIZE_MAX) {
                    auto& par = nodes[found].parents;
                    if (std::find(par.begin(), par.end(), pi) == par.end()) par.push_back(pi);
                    continue;
                }
                TNode node;
                node.group = m;
                node.key = key;
                node.inv = fib;
                node.parents = {pi};
                residue_t q2 = residue_t(Factorization::of(mod6).prime_power(2));
                residue_t q3 = residue_t(Factorization::of(mod6).prime_power(3));
                node.p2 = pool_id(pool2, q2 == 1 ? Subgroup(1, {}) : at_level(reduce(m6, q2)));
                node.p3 = pool_id(pool3, q3 == 1 ? Subgroup(1, {}) : at_level(reduce(m6, q3)));
                nodes.push_back(node);
                if (fib.genus <= 1) queue.push_back(nodes.size() - 1);
            }
        }
        for (auto& n : nodes) {
            Subgroup g = n.group.modulus() == 1 ? Subgroup::full(6) : n.group;
            n.comm6 = commutator_index_6adic(g, cfg.stab).index_in_sl2;
        }
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            auto& n = nodes[i];
            printf("node %zu H=%s fiber=%llu.%llu.%llu cusps=%llu ratcusps=%llu p2=%s p3=%s comm6=%llu key=%s parents=",
                   i, describe(n.group.modulus() == 1 ? Subgroup::full(6) : n.group).c_str(),
                   (unsigned long long)n.key.level, (unsigned long long)n.inv.psl2_index,
                   (unsigned long long)n.inv.genus, (unsigned long long)n.inv.cusp_count,
                   (unsigned long long)n.inv.rational_cusp_count, n.p2.c_str(), n.p3.c_str(),
                   (unsigned long long)n.comm6, n.key.str().c_str());
            for (auto pp : n.parents) printf("%zu,", pp);
            printf("\n");
            fflush(stdout);
        }
        // containment relations among nodes (for gray/black classification)
        for (std::size_t i = 0; i < nodes.size(); ++i)
            for (std::size_t j = 0; j < nodes.size(); ++j) {
                if (i == j) continue;
                if (nodes[j].inv.psl2_index <= nodes[i].inv.psl2_index) continue;
                Subgroup a = nodes[j].group.modulus() == 1 ? Subgroup::full(6) : nodes[j].group;
                Subgroup b = nodes[i].group.modulus() == 1 ? Subgroup::full(6) : nodes[i].group;
                if (class_contained(a, b)) printf("contain %zu < %zu\n", j, i);
            }
        return 0;
    }

    if (mode == "gridtree3") {
        // all products over the permissive pools relevant to the p=3 grid:
        // 2-adic candidates (the 15-group list up to the ambiguous classes)
        // and the exact 14-group 3-adic list
        auto pool2 = parse_group_file(data_path("whitelists/pool_2adic.txt"));
        auto pool3 = parse_group_file(data_path("whitelists/pool_3adic.txt"));
        std::vector<Subgroup> l2, l3;
        l2.push_back(Subgroup(1, {}));
        for (auto spec : {std::tuple{2u, 2u, 0u}, {2u, 3u, 0u}, {2u, 6u, 0u}, {4u, 2u, 0u},
                          {4u, 6u, 0u}, {4u, 8u, 0u}, {8u, 2u, 0u}, {8u, 6u, 0u}})
            for (auto& g : label_groups(pool2, residue_t(std::get<0>(spec)), std::get<1>(spec),
                                        std::get<2>(spec)))
                l2.push_back(g);
        for (auto spec : {std::tuple{3u, 4u, 0u}, {3u, 12u, 0u}, {9u, 12u, 0u}, {9u, 36u, 0u},
                          {27u, 36u, 0u}})
            for (auto& g : label_groups(pool3, residue_t(std::get<0>(spec)), std::get<1>(spec),
                                        std::get<2>(spec)))
                l3.push_back(g);
        printf("l2=%zu l3=%zu\n", l2.size(), l3.size());

        StabilizationConfig scfg;
        for (std::size_t hi = 0; hi < l2.size(); ++hi) {
            Subgroup h = l2[hi].modulus() == 1 ? Subgroup::full(2) : l2[hi];
            auto rep = commutator_index_padic(h, 2, scfg);
            printf("factor2 %zu %s idx=%llu label=%s\n", hi, describe(l2[hi]).c_str(),
                   (unsigned long long)rep.index_in_sl2, l2[hi].label().c_str());
            fflush(stdout);
        }
        for (std::size_t ki = 0; ki < l3.size(); ++ki) {
            Subgroup k = l3[ki].modulus() == 1 ? Subgroup::full(3) : l3[ki];
            auto rep = commutator_index_padic(k, 3, scfg);
            printf("factor3 %zu %s idx=%llu label=%s\n", ki, describe(l3[ki]).c_str(),
                   (unsigned long long)rep.index_in_sl2, l3[ki].label().c_str());
            fflush(stdout);
        }
        for (std::size_t hi = 0; hi < l2.size(); ++hi) {
            for (std::size_t ki = 0; ki < l3.size(); ++ki) {
                Subgroup h = l2[hi].modulus() == 1 ? Subgroup::full(2) : l2[hi];
                Subgroup k = l3[ki].modulus() == 1 ? Subgroup::full(3) : l3[ki];
                CurveInvariants inv = fiber_invariants(h, k);
                CurveKey key = fiber_curve_key(h, k);
                printf("prod %zu %zu fiber=%llu.%llu.%llu ratcusps=%llu key=%s\n", hi, ki,
                       (unsigned long long)key.level, (unsigned long long)inv.psl2_index,
                       (unsigned long long)inv.genus, (unsigned long long)inv.rational_cusp_count,
                       key.str().c_str());
            }
            fflush(stdout);
        }
        // containment posets on each side
        for (std::size_t i = 0; i < l2.size(); ++i)
            for (std::size_t j = 0; j < l2.size(); ++j) {
                if (i == j) continue;
                Subgroup a = l2[j].modulus() == 1 ? Subgroup::full(2) : l2[j];
                Subgroup b = l2[i].modulus() == 1 ? Subgroup::full(2) : l2[i];
                if (b.modulus() == 1 || class_contained(a, b)) printf("le2 %zu %zu\n", j, i);
            }
        for (std::size_t i = 0; i < l3.size(); ++i)
            for (std::size_t j = 0; j < l3.size(); ++j) {
                if (i == j) continue;
                Subgroup a = l3[j].modulus() == 1 ? Subgroup::full(3) : l3[j];
                Subgroup b = l3[i].modulus() == 1 ? Subgroup::full(3) : l3[i];
                if (b.modulus() == 1 || class_contained(a, b)) printf("le3 %zu %zu\n", j, i);
            }
        // entanglement factors per pair (over the stabilized commutators)
        std::vector<Subgroup> c2, c3;
        for (auto& g : l2) {
            Subgroup base = g.modulus() == 1 ? Subgroup::full(4) : g;
            auto rep = commutator_index_padic(base, 2, scfg);
            auto com = commutator_subgroup(image_at(base, rep.stabilized_modulus));
            c2.push_back(subgroup_from_elements(rep.stabilized_modulus, com.elems.elems));
        }
        for (auto& g : l3) {
            Subgroup base = g.modulus() == 1 ? Subgroup::full(9) : g;
            auto rep = commutator_index_padic(base, 3, scfg);
            auto com = commutator_subgroup(image_at(base, rep.stabilized_modulus));
            c3.push_back(subgroup_from_elements(rep.stabilized_modulus, com.elems.elems));
        }
        for (std::size_t hi = 0; hi < l2.size(); ++hi) {
            for (std::size_t ki = 0; ki < l3.size(); ++ki) {
                auto common = common_quotient_orders(c2[hi], c3[ki], 512);
                printf("delta %zu %zu ", hi, ki);
                for (auto& [q, w] : common) printf("%llu,", (unsigned long long)q);
                printf("\n");
            }
            fflush(stdout);
        }
        return 0;
    }

    if (mode == "lat5scan") {
        auto pool = parse_group_file(data_path("whitelists/pool_2adic.txt"));
        auto pool3 = parse_group_file(data_path("whitelists/pool_3adic.txt"));
        auto c820 = label_groups(pool, 8, 2, 0);
        auto c860 = label_groups(pool, 8, 6, 0);
        auto c360 = label_groups(pool3, 3, 6, 0);
        LatticeSpec spec{5, "b5", 14, 29, {2, 12},
                         {{15, 24, 1, 1}, {15, 36, 1, 1}, {20, 24, 1, 1}, {30, 12, 1, 1},
                          {30, 36, 1, 2}, {60, 36, 1, 7}, {60, 12, 1, 1}, {120, 36, 1, 8},
                          {120, 12, 1, 1}, {30, 54, 2, 1}, {45, 54, 2, 1}, {120, 36, 3, 2},
                          {120, 72, 3, 2}}};
        std::vector<unsigned> masks;
        for (unsigned m = 0; m < 64; ++m) {
            if (__builtin_popcount(m) == 3) masks.push_back(m);
        }
        for (int w820 = 0; w820 < 2; ++w820)
            for (unsigned mask : masks)
                for (int e360 = 0; e360 < 2; ++e360) {
                    ProjectionWhitelist wl;
                    wl.two_adic.push_back(Subgroup(1, {}));
                    for (auto& g : label_groups(pool, 2, 3, 0)) wl.two_adic.push_back(g);
                    for (auto& g : label_groups(pool, 4, 4, 0)) wl.two_adic.push_back(g);
                    wl.two_adic.push_back(c820[w820]);
                    for (unsigned b = 0; b < c860.size(); ++b)
                        if (mask & (1u << b)) wl.two_adic.push_back(c860[b]);
                    wl.three_adic.push_back(Subgroup(1, {}));
                    for (auto& g : label_groups(pool3, 3, 3, 0)) wl.three_adic.push_back(g);
                    for (auto& g : label_groups(pool3, 3, 4, 0)) wl.three_adic.push_back(g);
                    wl.three_adic.push_back(c360[e360]);
                    for (auto& g : label_groups(pool3, 9, 9, 0)) wl.three_adic.push_back(g);
                    for (std::size_t scheme = 0; scheme < 2; ++scheme) {
                        try {
                            auto res = derive_lattice_oracle(spec, wl, {scheme});
                            printf("lat5 w820=%d mask=%u e360=%d scheme=%zu -> %s %s nodes=%zu\n",
                                   w820, mask, e360, scheme, res.ok ? "OK" : "FAIL",
                                   res.reason.c_str(), res.lattice.nodes.size());
                            if (res.ok) break;
                        } catch (const std::exception& ex) {
                            printf("lat5 w820=%d mask=%u e360=%d scheme=%zu -> THROW %s\n", w820,
                                   mask, e360, scheme, ex.what());
                        }
                    }
                    fflush(stdout);
                }
        return 0;
    }

    if (mode == "lat5k") {
        // the X_sp(5) and X_0(25) lattices with the frozen p=5 whitelists
        std::string kname = argc > 2 ? argv[2] : "sp5";
        ProjectionWhitelist wl;
        wl.two_adic = parse_group_file(data_path("whitelists/wl_p5_2adic.txt"));
        wl.three_adic = parse_group_file(data_path("whitelists/wl_p5_3adic.txt"));
        LatticeSpec spec{5, kname, 1, 4, {2}, {}};
        // four finite nodes, all maximal: fiber classes per the table
        if (kname == "sp5")
            spec.grays = {{30, 60, 3, 1}, {60, 60, 3, 1}, {120, 60, 3, 2}};
        else
            spec.grays = {{150, 60, 3, 1}, {300, 60, 3, 1}, {600, 60, 3, 2}};
        auto res = derive_lattice_oracle(spec, wl, {});
        printf("lat5k %s -> %s %s nodes=%zu\n", kname.c_str(), res.ok ? "OK" : "FAIL",
               res.reason.c_str(), res.lattice.nodes.size());
        for (std::size_t i = 0; i < res.lattice.nodes.size(); ++i) {
            auto& n = res.lattice.nodes[i];
            printf("  node %zu: H=%s fiber=%llu.%llu.%llu %s color=%d\n", i,
                   describe(n.group.modulus() == 1 ? Subgroup::full(6) : n.group).c_str(),
                   (unsigned long long)n.fiber_key.level, (unsigned long long)n.fiber.psl2_index,
                   (unsigned long long)n.fiber.genus,
                   n.verdict.value == Finiteness::Infinite ? "inf" : "fin", int(n.color));
        }
        if (res.ok && argc > 3 && std::string(argv[3]) == "save")
            res.oracle.save_file(data_path(std::string("oracles/oracle_lat5_") + kname + ".txt"));
        return res.ok ? 0 : 1;
    }

    fprintf(stderr, "usage: derive_data padic|pool|lat13|lat7|lat5|lat5k ...\n");
    return 2;
}
