#include "gl2/curve.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "gl2/constructions.hpp"

namespace gl2 {

void CurveInvariants::validate() const {
    std::int64_t lhs = 12 * (std::int64_t(genus) - 1) + 3 * std::int64_t(epsilon2) +
                       4 * std::int64_t(epsilon3) + 6 * std::int64_t(cusp_count);
    if (lhs != std::int64_t(psl2_index))
        throw std::logic_error("genus formula integrality violated: d=" + std::to_string(psl2_index));
}

CosetAction CosetAction::of(const Subgroup& g_in, std::size_t cap) {
    Subgroup g = adjoin_minus_I(g_in);
    if (!g.det_image_full())
        throw NotAModularCurveOverQ("determinant image not full for group mod " +
                                    std::to_string(g.modulus()));
    residue_t n = g.modulus();

    CosetAction act;
    act.modulus = n;
    if (n == 1) {
        act.degree = 1;
        act.perm_T = act.perm_S = act.perm_R = {0};
        return act;
    }

    ElementList sl2_elems = Subgroup::sl2(n).elements(cap);
    const std::vector<packed_t>& E = sl2_elems.elems;
    auto pos = [&](packed_t v) {
        return std::size_t(std::lower_bound(E.begin(), E.end(), v) - E.begin());
    };

    ElementList u = sl2_part(g);
    std::vector<std::uint32_t> cid(E.size(), UINT32_MAX);
    std::vector<packed_t> reps;
    for (std::size_t i = 0; i < E.size(); ++i) {
        if (cid[i] != UINT32_MAX) continue;
        std::uint32_t c = std::uint32_t(reps.size());
        reps.push_back(E[i]);
        for (packed_t h : u.elems) cid[pos(packed_mul(h, E[i], n))] = c;
    }
    act.degree = std::uint32_t(reps.size());

    auto perm_of = [&](const Mat2& m) {
        packed_t pm = m.pack();
        std::vector<std::uint32_t> p(reps.size());
        for (std::size_t c = 0; c < reps.size(); ++c) p[c] = cid[pos(packed_mul(reps[c], pm, n))];
        return p;
    };
    act.perm_T = perm_of(Mat2(n, 1, 1, 0, 1));
    act.perm_S = perm_of(Mat2(n, 0, -1, 1, 0));
    act.perm_R = perm_of(Mat2(n, 0, -1, 1, -1));

    // twists: coset -> coset of g_d * rep * diag(1,d), with g_d in G of
    // determinant 1/d so that the product stays in SL2
    const ElementList& gel = g.elements();
    auto fn = Factorization::of(n);
    for (auto& [p, e] : fn.primes) {
        (void)e;
        std::vector<residue_t> dgens;
        residue_t q = residue_t(fn.prime_power(p));
        if (p == 2) {
            if (q >= 4) dgens.push_back(q - 1);
            if (q >= 8) dgens.push_back(3);
        } else {
            std::uint64_t phi = euler_phi(q);
            for (residue_t x = 2; x < q; ++x) {
                if (!is_unit_mod(x, q)) continue;
                bool gen = true;
                for (auto& [r, re] : Factorization::of(phi).primes) {
                    (void)re;
                    std::uint64_t acc = 1, base = x, ee = phi / r;
                    while (ee) { if (ee & 1) acc = acc * base % q; base = base * base % q; ee >>= 1; }
                    if (acc == 1) { gen = false; break; }
                }
                if (gen) { dgens.push_back(x); break; }
            }
        }
        residue_t rest = residue_t(n / q);
        for (residue_t dq : dgens) {
            residue_t d;
            if (rest == 1) {
                d = dq;
            } else {
                // CRT: dq at this prime power, 1 at the others
                Mat2 joined = crt_join({Mat2(q, dq, 0, 0, dq), Mat2::identity(rest)});
                d = joined.a;
            }
            residue_t dinv = inv_mod(d, n);
            packed_t gd = 0;
            bool found = false;
            for (packed_t v : gel.elems)
                if (Mat2::unpack(v, n).det() == dinv) { gd = v; found = true; break; }
            if (!found) throw NotAModularCurveOverQ("no element of the needed determinant");
            packed_t chi = Mat2(n, 1, 0, 0, d).pack();
            std::vector<std::uint32_t> tp(reps.size());
            for (std::size_t c = 0; c < reps.size(); ++c)
                tp[c] = cid[pos(packed_mul(packed_mul(gd, reps[c], n), chi, n))];
            act.twists.push_back(std::move(tp));
        }
    }
    return act;
}

CosetAction CosetAction::product(const CosetAction& a, const CosetAction& b) {
    if (gcd_u64(a.modulus, b.modulus) != 1)
        throw ModulusMismatch("CosetAction::product requires coprime moduli");
    CosetAction out;
    out.modulus = residue_t(std::uint64_t(a.modulus) * b.modulus);
    out.degree = a.degree * b.degree;
    auto combine = [&](const std::vector<std::uint32_t>& pa, const std::vector<std::uint32_t>& pb) {
        std::vector<std::uint32_t> p(std::size_t(a.degree) * b.degree);
        for (std::uint32_t i = 0; i < a.degree; ++i)
            for (std::uint32_t j = 0; j < b.degree; ++j)
                p[std::size_t(i) * b.degree + j] = pa[i] * b.degree + pb[j];
        return p;
    };
    out.perm_T = combine(a.perm_T, b.perm_T);
    out.perm_S = combine(a.perm_S, b.perm_S);
    out.perm_R = combine(a.perm_R, b.perm_R);
    std::vector<std::uint32_t> ida(a.degree), idb(b.degree);
    for (std::uint32_t i = 0; i < a.degree; ++i) ida[i] = i;
    for (std::uint32_t j = 0; j < b.degree; ++j) idb[j] = j;
    for (auto& t : a.twists) out.twists.push_back(combine(t, idb));
    for (auto& t : b.twists) out.twists.push_back(combine(ida, t));
    return out;
}

namespace {

std::uint64_t count_fixed(const std::vector<std::uint32_t>& p) {
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] == i) ++c;
    return c;
}

std::vector<std::uint32_t> orbit_ids(const std::vector<std::uint32_t>& p, std::uint32_t& count) {
    std::vector<std::uint32_t> oid(p.size(), UINT32_MAX);
    count = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (oid[i] != UINT32_MAX) continue;
        std::uint32_t id = count++;
        std::size_t j = i;
        while (oid[j] == UINT32_MAX) {
            oid[j] = id;
            j = p[j];
        }
    }
    return oid;
}

std::uint64_t mix64(std::uint64_t x) {
    x *= 0x9e3779b97f4a7c15ull;
    x ^= x >> 31;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    return x;
}

std::uint64_t histogram_hash(std::uint64_t n, const std::vector<std::uint32_t>& h) {
    std::uint64_t acc = mix64(n);
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h[i]) acc += mix64((std::uint64_t(i) << 24) ^ h[i]);
    return acc;
}

}  // namespace

CurveInvariants invariants_from_action(const CosetAction& act) {
    CurveInvariants inv;
    inv.psl2_index = act.degree;
    inv.epsilon2 = count_fixed(act.perm_S);
    inv.epsilon3 = count_fixed(act.perm_R);

    std::uint32_t norb = 0;
    auto oid = orbit_ids(act.perm_T, norb);
    inv.cusp_count = norb;

    std::vector<std::uint32_t> orbit_rep(norb, UINT32_MAX);
    for (std::size_t i = 0; i < oid.size(); ++i)
        if (orbit_rep[oid[i]] == UINT32_MAX) orbit_rep[oid[i]] = std::uint32_t(i);
    std::uint64_t rational = 0;
    for (std::uint32_t o = 0; o < norb; ++o) {
        bool fixed = true;
        for (auto& t : act.twists)
            if (oid[t[orbit_rep[o]]] != o) { fixed = false; break; }
        if (fixed) ++rational;
    }
    inv.rational_cusp_count = rational;

    std::int64_t twelve_g = 12 + std::int64_t(act.degree) - 3 * std::int64_t(inv.epsilon2) -
                            4 * std::int64_t(inv.epsilon3) - 6 * std::int64_t(inv.cusp_count);
    if (twelve_g % 12 != 0 || twelve_g < 0)
        throw std::logic_error("genus formula produced a non-integer for index " +
                               std::to_string(act.degree));
    inv.genus = std::uint64_t(twelve_g / 12);
    inv.validate();
    return inv;
}

CurveInvariants curve_invariants(const Subgroup& g) {
    return invariants_from_action(CosetAction::of(g));
}

CurveInvariants fiber_invariants(const Subgroup& h, const Subgroup& k) {
    if (gcd_u64(h.modulus(), k.modulus()) == 1)
        return invariants_from_action(CosetAction::product(CosetAction::of(h), CosetAction::of(k)));
    // joint presentation at the lcm modulus, via intersection of preimages
    std::uint64_t l = std::uint64_t(h.modulus()) / gcd_u64(h.modulus(), k.modulus()) * k.modulus();
    Subgroup hh = image_at(h, residue_t(l));
    Subgroup kk = image_at(k, residue_t(l));
    std::vector<packed_t> common;
    for (packed_t v : hh.elements().elems)
        if (kk.elements().contains(v)) common.push_back(v);
    return curve_invariants(subgroup_from_elements(residue_t(l), common));
}

std::vector<std::uint32_t> trace_det_histogram(const Subgroup& g_in) {
    Subgroup g = at_level(adjoin_minus_I(g_in));
    residue_t n = g.modulus();
    std::vector<std::uint32_t> h(std::size_t(n) * n, 0);
    for (packed_t v : g.elements().elems) {
        Mat2 m = Mat2::unpack(v, n);
        ++h[std::size_t(m.trace()) * n + m.det()];
    }
    return h;
}

std::string CurveKey::str() const {
    std::ostringstream os;
    os << level << "." << index << "." << genus << "." << std::hex << inv_hash;
    return os.str();
}

CurveKey curve_key(const Subgroup& g_in) {
    Subgroup g = at_level(adjoin_minus_I(g_in));
    CurveKey k;
    k.level = g.modulus();
    CurveInvariants inv = curve_invariants(g);
    k.index = inv.psl2_index;
    k.genus = inv.genus;
    auto h = trace_det_histogram(g);
    k.inv_hash = histogram_hash(g.modulus(), h) ^
                 mix64(0x51 * inv.epsilon2 + 0x3 * inv.epsilon3 + 257 * inv.cusp_count +
                       inv.rational_cusp_count);
    return k;
}

CurveKey fiber_curve_key(const Subgroup& h_in, const Subgroup& k_in) {
    Subgroup h = at_level(adjoin_minus_I(h_in));
    Subgroup k = at_level(adjoin_minus_I(k_in));
    if (h.modulus() == 1) return curve_key(k);
    if (k.modulus() == 1) return curve_key(h);
    if (gcd_u64(h.modulus(), k.modulus()) != 1) {
        std::uint64_t l = std::uint64_t(h.modulus()) / gcd_u64(h.modulus(), k.modulus()) * k.modulus();
        Subgroup hh = image_at(h, residue_t(l));
        Subgroup kk = image_at(k, residue_t(l));
        std::vector<packed_t> common;
        for (packed_t v : hh.elements().elems)
            if (kk.elements().contains(v)) common.push_back(v);
        return curve_key(subgroup_from_elements(residue_t(l), common));
    }
    CurveKey key;
    std::uint64_t n1 = h.modulus(), n2 = k.modulus();
    std::uint64_t n = n1 * n2;
    key.level = n;

    CosetAction pa = CosetAction::product(CosetAction::of(h), CosetAction::of(k));
    CurveInvariants inv = invariants_from_action(pa);
    key.index = inv.psl2_index;
    key.genus = inv.genus;

    // CRT convolution of the factor histograms
    auto h1 = trace_det_histogram(h);
    auto h2 = trace_det_histogram(k);
    std::uint64_t acc = mix64(n);
    for (std::uint64_t t = 0; t < n; ++t)
        for (std::uint64_t d = 0; d < n; ++d) {
            std::uint64_t c1 = h1[std::size_t(t % n1) * n1 + d % n1];
            if (!c1) continue;
            std::uint64_t c2 = h2[std::size_t(t % n2) * n2 + d % n2];
            if (!c2) continue;
            acc += mix64(((t * n + d) << 24) ^ (c1 * c2));
        }
    key.inv_hash = acc ^ mix64(0x51 * inv.epsilon2 + 0x3 * inv.epsilon3 + 257 * inv.cusp_count +
                               inv.rational_cusp_count);
    return key;
}

void RankOracle::add(const std::string& key, Finiteness f, const std::string& note) {
    entries_[key] = {f, note};
}

std::optional<std::pair<Finiteness, std::string>> RankOracle::lookup(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

RankOracle RankOracle::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open oracle file " + path);
    RankOracle o;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        std::string key, verdict;
        if (!(is >> key >> verdict))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed oracle line");
        std::string note;
        std::getline(is, note);
        if (!note.empty() && note[0] == ' ') note.erase(0, 1);
        Finiteness f;
        if (verdict == "Finite") f = Finiteness::Finite;
        else if (verdict == "Infinite") f = Finiteness::Infinite;
        else if (verdict == "Unknown") f = Finiteness::Unknown;
        else throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad verdict " + verdict);
        o.add(key, f, note);
    }
    return o;
}

void RankOracle::save_file(const std::string& path) const {
    std::ofstream out(path);
    for (auto& [k, v] : entries_) {
        const char* s = v.first == Finiteness::Finite    ? "Finite"
                        : v.first == Finiteness::Infinite ? "Infinite"
                                                          : "Unknown";
        out << k << " " << s << " " << v.second << "\n";
    }
}

FinitenessVerdict finiteness(const CurveKey& key, const CurveInvariants& inv, const RankOracle& oracle) {
    if (inv.genus >= 2) return {Finiteness::Finite, "genus>=2"};
    if (auto e = oracle.lookup(key.str())) return {e->first, "oracle:" + e->second};
    return {Finiteness::Unknown, "none"};
}

}  // namespace gl2
