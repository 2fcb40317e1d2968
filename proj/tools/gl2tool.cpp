// Command-line surface over the group/curve/lattice machinery.  Subcommands
// emit JSON reports on stdout; --strict exits nonzero whenever a report
// contains an Unknown verdict or a failed verification.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "gl2/adelic.hpp"
#include "gl2/commutator.hpp"
#include "gl2/constructions.hpp"
#include "gl2/curve.hpp"
#include "gl2/frobenius.hpp"
#include "gl2/goursat.hpp"
#include "gl2/io.hpp"
#include "gl2/lattice.hpp"
#include "gl2/maximal.hpp"

using namespace gl2;
using nlohmann::json;

namespace {

Subgroup make_named_group(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("expected kind:modulus, e.g. borel:5");
    std::string kind = spec.substr(0, colon);
    residue_t n = residue_t(std::stoul(spec.substr(colon + 1)));
    if (kind == "borel") return borel(n);
    if (kind == "csp") return cartan(n, CartanKind::Split);
    if (kind == "cns") return cartan(n, CartanKind::Nonsplit);
    if (kind == "csp+") return cartan_normalizer(n, CartanKind::Split);
    if (kind == "cns+") return cartan_normalizer(n, CartanKind::Nonsplit);
    if (kind == "s4") return s4_normalizer(n);
    if (kind == "full") return Subgroup::full(n);
    if (kind == "sl2") return Subgroup::sl2(n);
    throw CLI::ValidationError("unknown group kind " + kind);
}

json group_json(const Subgroup& g) {
    json j;
    j["label"] = g.label();
    j["modulus"] = g.modulus();
    j["record"] = group_record(g);
    return j;
}

json config_json(const RunConfig& cfg, const std::map<std::string, std::string>& inputs) {
    json j;
    j["closure_cap"] = cfg.closure_cap;
    j["certify_trials"] = cfg.certify_trials;
    j["stabilization"] = {{"max_exp_2", cfg.stab.max_exp_2},
                          {"max_exp_3", cfg.stab.max_exp_3},
                          {"max_exp_large", cfg.stab.max_exp_large}};
    json files = json::object();
    for (auto& [name, path] : inputs) {
        char buf[32];
        snprintf(buf, sizeof buf, "%016llx", (unsigned long long)file_digest(path));
        files[name] = {{"path", path}, {"fnv1a", buf}};
    }
    j["inputs"] = files;
    return j;
}

int emit(const json& j, bool strict, bool failed) {
    std::cout << j.dump(2) << "\n";
    return (strict && failed) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"open subgroups of GL2(Zhat): invariants, lattices, adelic indices"};
    app.require_subcommand(1);
    bool strict = false;
    app.add_flag("--strict", strict, "exit nonzero on Unknown/Incomplete/VerificationFailed");
    RunConfig cfg;
    app.add_option("--closure-cap", cfg.closure_cap, "element cap for closures");
    app.add_option("--certify-trials", cfg.certify_trials, "maximality certification trials");

    auto* group = app.add_subcommand("group", "named groups and group files");
    auto* gmake = group->add_subcommand("make", "construct a named group");
    std::string make_spec;
    gmake->add_option("spec", make_spec, "kind:modulus (borel, csp, cns, csp+, cns+, s4, full)")
        ->required();

    auto* ginfo = group->add_subcommand("info", "invariants of a group");
    std::string info_make, info_file;
    ginfo->add_option("--make", info_make, "named group kind:modulus");
    ginfo->add_option("--group", info_file, "group file (first record)");

    auto* gcomm = group->add_subcommand("commutator-index", "stabilized commutator index");
    std::string comm_make, comm_file;
    unsigned comm_prime = 0;
    gcomm->add_option("--make", comm_make, "named group kind:modulus");
    gcomm->add_option("--group", comm_file, "group file (first record)");
    gcomm->add_option("--p", comm_prime, "prime (0 means the 6-adic joint index)");

    auto* curve = app.add_subcommand("curve", "modular curve invariants");
    auto* cinv = curve->add_subcommand("invariants", "invariants of X_G");
    std::string cinv_file, cinv_make;
    cinv->add_option("--group", cinv_file, "group file");
    cinv->add_option("--make", cinv_make, "named group kind:modulus");

    auto* goursat = app.add_subcommand("goursat", "fiber products and entanglement");
    auto* gdelta = goursat->add_subcommand("delta", "entanglement factors of two groups");
    std::string left_file, right_file;
    gdelta->add_option("--left", left_file, "left group file")->required();
    gdelta->add_option("--right", right_file, "right group file")->required();

    auto* lattice = app.add_subcommand("lattice", "recursive 6-adic lattices");
    auto* lbuild = lattice->add_subcommand("build", "build the lattice for a p-adic group");
    unsigned lat_p = 5;
    std::string lat_k = "borel", lat_wl2, lat_wl3, lat_oracle, lat_out;
    lbuild->add_option("--p", lat_p, "isogeny degree (5, 7, 13)")->required();
    lbuild->add_option("--k", lat_k, "p-adic group: borel, sp, x025");
    lbuild->add_option("--whitelist2", lat_wl2, "2-adic whitelist file")->required();
    lbuild->add_option("--whitelist3", lat_wl3, "3-adic whitelist file")->required();
    lbuild->add_option("--oracle", lat_oracle, "rank oracle file")->required();
    lbuild->add_option("--out", lat_out, "also write the report to this path");

    auto* adelic = app.add_subcommand("adelic-index", "product formula for the adelic index");
    unsigned ad_p = 13;
    std::string ad_g6, ad_gp, ad_g6_make, ad_gp_make;
    adelic->add_option("--p", ad_p, "isogeny degree")->required();
    adelic->add_option("--g6", ad_g6, "6-adic group file");
    adelic->add_option("--g6-make", ad_g6_make, "named 6-adic group");
    adelic->add_option("--gp", ad_gp, "p-adic group file");
    adelic->add_option("--gp-make", ad_gp_make, "named p-adic group");

    auto* verify = app.add_subcommand("verify", "verification suites");
    auto* vapp = verify->add_subcommand("appendix", "check the sharpness examples");
    std::string fix_file, catalog_dir;
    std::size_t prime_budget = 50;
    vapp->add_option("--fixtures", fix_file, "fixture file")->required();
    vapp->add_option("--catalog", catalog_dir, "catalog directory")->required();
    vapp->add_option("--primes", prime_budget, "good primes sampled per curve");

    auto* tables = app.add_subcommand("tables", "index tables");
    auto* tcheck = tables->add_subcommand("check", "cross-check the index tables");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gmake->parsed()) {
            Subgroup g = make_named_group(make_spec);
            std::cout << group_record(g) << "\n";
            return 0;
        }
        if (ginfo->parsed()) {
            Subgroup g = info_make.empty() ? parse_group_file(info_file).at(0)
                                           : make_named_group(info_make);
            CurveInvariants inv = curve_invariants(g);
            json j;
            j["group"] = group_json(g);
            j["level"] = level(g);
            j["order"] = g.order();
            j["index_in_gl2"] = g.index_in_gl2();
            j["contains_minus_I"] = g.contains_minus_I();
            j["det_image_full"] = g.det_image_full();
            j["psl2_index"] = inv.psl2_index;
            j["genus"] = inv.genus;
            j["cusps"] = inv.cusp_count;
            j["rational_cusps"] = inv.rational_cusp_count;
            j["epsilon2"] = inv.epsilon2;
            j["epsilon3"] = inv.epsilon3;
            std::map<std::string, std::string> inputs;
            if (!info_file.empty()) inputs["group"] = info_file;
            j["config"] = config_json(cfg, inputs);
            return emit(j, strict, false);
        }
        if (gcomm->parsed()) {
            Subgroup g = comm_make.empty() ? parse_group_file(comm_file).at(0)
                                           : make_named_group(comm_make);
            CommutatorReport rep = comm_prime == 0
                                       ? commutator_index_6adic(g, cfg.stab)
                                       : commutator_index_padic(g, residue_t(comm_prime), cfg.stab);
            json j;
            j["group"] = group_json(g);
            j["index_in_sl2"] = rep.index_in_sl2;
            j["stabilized_modulus"] = rep.stabilized_modulus;
            j["certificate"] = rep.certificate;
            j["transcript"] = rep.transcript;
            std::map<std::string, std::string> inputs;
            if (!comm_file.empty()) inputs["group"] = comm_file;
            j["config"] = config_json(cfg, inputs);
            return emit(j, strict, !rep.certificate);
        }
        if (cinv->parsed()) {
            Subgroup g = cinv_make.empty() ? parse_group_file(cinv_file).at(0)
                                           : make_named_group(cinv_make);
            CurveInvariants inv = curve_invariants(g);
            json j;
            j["group"] = group_json(g);
            j["psl2_index"] = inv.psl2_index;
            j["epsilon2"] = inv.epsilon2;
            j["epsilon3"] = inv.epsilon3;
            j["cusps"] = inv.cusp_count;
            j["rational_cusps"] = inv.rational_cusp_count;
            j["genus"] = inv.genus;
            j["key"] = curve_key(g).str();
            std::map<std::string, std::string> inputs;
            if (!cinv_file.empty()) inputs["group"] = cinv_file;
            j["config"] = config_json(cfg, inputs);
            return emit(j, strict, false);
        }
        if (gdelta->parsed()) {
            auto lgs = parse_group_file(left_file);
            auto rgs = parse_group_file(right_file);
            json deltas = json::array();
            for (auto& a : lgs) {
                for (auto& b : rgs) {
                    auto common = common_quotient_orders(a, b);
                    json row;
                    row["left"] = a.label();
                    row["right"] = b.label();
                    json ds = json::array();
                    for (auto& [q, m] : common) {
                        json w;
                        w["order"] = q;
                        w["kernel_left_order"] = m.kernel_a.order();
                        w["kernel_right_order"] = m.kernel_b.order();
                        ds.push_back(w);
                    }
                    row["delta"] = ds;
                    deltas.push_back(row);
                }
            }
            json j;
            j["pairs"] = deltas;
            j["config"] = config_json(cfg, {{"left", left_file}, {"right", right_file}});
            return emit(j, strict, false);
        }
        if (lbuild->parsed()) {
            Subgroup k = lat_k == "borel" ? borel(residue_t(lat_p))
                         : lat_k == "sp"  ? cartan(residue_t(lat_p), CartanKind::Split)
                         : lat_k == "x025"
                             ? borel(25)
                             : throw CLI::ValidationError("unknown K " + lat_k);
            ProjectionWhitelist wl;
            wl.two_adic = parse_group_file(lat_wl2);
            wl.three_adic = parse_group_file(lat_wl3);
            RankOracle oracle = RankOracle::load_file(lat_oracle);
            Lattice lat = build_lattice(lat_p, k, wl, oracle, cfg);
            auto gray = color_lattice(lat);
            auto inf_set = commutator_index_set(lat, true, cfg);
            json nodes = json::array();
            for (std::size_t i = 0; i < lat.nodes.size(); ++i) {
                auto& n = lat.nodes[i];
                json nj;
                nj["id"] = i;
                nj["group"] = group_record(n.group);
                nj["level"] = n.group_level;
                nj["fiber"] = {{"level", n.fiber_key.level},
                               {"index", n.fiber.psl2_index},
                               {"genus", n.fiber.genus},
                               {"cusps", n.fiber.cusp_count}};
                nj["key"] = n.fiber_key.str();
                nj["verdict"] = n.verdict.value == Finiteness::Infinite ? "Infinite"
                                : n.verdict.value == Finiteness::Finite ? "Finite"
                                                                        : "Unknown";
                nj["provenance"] = n.verdict.provenance;
                nj["color"] = n.color == NodeColor::Inf              ? "inf"
                              : n.color == NodeColor::FinMaximal    ? "fin-maximal"
                              : n.color == NodeColor::FinNonmaximal ? "fin-nonmaximal"
                                                                    : "unknown";
                nj["parents"] = n.parents;
                if (n.commutator_index6) nj["commutator_index6"] = n.commutator_index6;
                nodes.push_back(nj);
            }
            json j;
            j["p"] = lat_p;
            j["k"] = lat_k;
            j["nodes"] = nodes;
            j["counts"] = {{"total", lat.nodes.size()},
                           {"infinite", lat.inf_nodes().size()},
                           {"finite", lat.fin_nodes().size()},
                           {"fin_maximal", gray.size()}};
            j["inf_commutator_indices"] = inf_set;
            j["has_unknown"] = lat.has_unknown;
            j["config"] = config_json(cfg, {{"whitelist2", lat_wl2},
                                            {"whitelist3", lat_wl3},
                                            {"oracle", lat_oracle}});
            if (!lat_out.empty()) {
                std::ofstream out(lat_out);
                out << j.dump(2) << "\n";
            }
            return emit(j, strict, lat.has_unknown);
        }
        if (adelic->parsed()) {
            Subgroup g6 = ad_g6_make.empty() ? parse_group_file(ad_g6).at(0)
                                             : make_named_group(ad_g6_make);
            AdelicIndexReport rep;
            json j;
            if (ad_p == 2 || ad_p == 3) {
                rep = adelic_index_23(g6, ad_p, cfg.stab);
            } else {
                Subgroup gp = ad_gp_make.empty() ? parse_group_file(ad_gp).at(0)
                                                 : make_named_group(ad_gp_make);
                rep = adelic_index_isogeny(g6, gp, ad_p, cfg.stab);
                j["factor_p"] = {{"index", rep.factorp.index_in_sl2},
                                 {"stabilized_modulus", rep.factorp.stabilized_modulus},
                                 {"certificate", rep.factorp.certificate}};
            }
            j["p"] = ad_p;
            j["factor_6"] = {{"index", rep.factor6.index_in_sl2},
                             {"stabilized_modulus", rep.factor6.stabilized_modulus},
                             {"certificate", rep.factor6.certificate}};
            j["delta"] = rep.delta;
            j["adelic_index"] = rep.index;
            j["in_Ip"] = rep.in_table;
            std::map<std::string, std::string> inputs;
            if (!ad_g6.empty()) inputs["g6"] = ad_g6;
            if (!ad_gp.empty()) inputs["gp"] = ad_gp;
            j["config"] = config_json(cfg, inputs);
            return emit(j, strict, !rep.in_table);
        }
        if (vapp->parsed()) {
            auto fixtures = parse_fixture_file(fix_file);
            std::map<unsigned, std::vector<Subgroup>> catalog;
            for (unsigned p : {5u, 7u, 11u, 13u, 17u, 37u}) {
                std::string path = catalog_dir + "/catalog_p" + std::to_string(p) + ".txt";
                std::ifstream probe(path);
                if (probe) catalog[p] = parse_group_file(path);
            }
            AppendixReport rep = verify_appendix(fixtures, catalog, prime_budget);
            json rows = json::array();
            for (auto& r : rep.rows) {
                json rj;
                rj["label"] = r.label;
                rj["p"] = r.p;
                rj["claimed_index"] = r.claimed_index;
                rj["status"] = r.status == RowStatus::Pinned ? "pinned" : "consistent-unpinned";
                if (r.status == RowStatus::Pinned) rj["pinned_index"] = r.pinned_index;
                rj["notes"] = r.notes;
                rows.push_back(rj);
            }
            json j;
            j["rows"] = rows;
            j["pinned"] = rep.pinned;
            j["consistent_unpinned"] = rep.consistent;
            j["config"] = config_json(cfg, {{"fixtures", fix_file}});
            return emit(j, strict, false);
        }
        if (tcheck->parsed()) {
            IndexTables::self_check();
            json j;
            j["full_set_size"] = IndexTables::all().size();
            json per = json::object();
            for (unsigned p : IndexTables::primes()) per[std::to_string(p)] = IndexTables::for_prime(p);
            j["I_p"] = per;
            j["subset_check"] = "every I_p is contained in the conjectured set";
            return emit(j, strict, false);
        }
    } catch (const VerificationFailed& ex) {
        json j;
        j["error"] = "VerificationFailed";
        j["what"] = ex.what();
        std::cout << j.dump(2) << "\n";
        return 1;
    } catch (const std::exception& ex) {
        json j;
        j["error"] = "error";
        j["what"] = ex.what();
        std::cout << j.dump(2) << "\n";
        return 1;
    }
    return 0;
}
