#include "gl2/adelic.hpp"

#include <algorithm>
#include <sstream>

#include "gl2/constructions.hpp"

namespace gl2 {

namespace {

const std::vector<std::uint64_t> kAll{
    2,   4,   6,   8,   10,  12,  16,  20,  24,  30,  32,  36,   40,   48,   54,   60,
    72,  80,  84,  96,  108, 112, 120, 128, 144, 160, 182, 192,  200,  216,  220,  224,
    240, 288, 300, 336, 360, 384, 480, 504, 576, 768, 864, 1152, 1200, 1296, 1536, 2736};

const std::map<unsigned, std::vector<std::uint64_t>> kPerPrime{
    {2, {12, 48, 72, 96, 144, 192, 288, 384, 576, 768, 864, 1152, 1536}},
    {3, {16, 32, 48, 96, 128, 144, 160, 288, 384, 768, 864, 1296}},
    {5, {48, 192, 288, 384, 576, 864, 1200}},
    {7, {96, 192, 576, 768}},
    {11, {480}},
    {13, {336}},
    {17, {576}},
    {37, {2736}}};

const std::vector<unsigned> kPrimes{2, 3, 5, 7, 11, 13, 17, 37};

bool checked = false;

}  // namespace

void IndexTables::self_check() {
    if (checked) return;
    if (kAll.size() != 48) throw std::logic_error("index table: expected 48 values");
    if (!std::is_sorted(kAll.begin(), kAll.end())) throw std::logic_error("index table not ascending");
    for (auto& [p, v] : kPerPrime) {
        if (!std::is_sorted(v.begin(), v.end()))
            throw std::logic_error("I_" + std::to_string(p) + " not ascending");
        for (auto x : v)
            if (!std::binary_search(kAll.begin(), kAll.end(), x))
                throw std::logic_error("I_" + std::to_string(p) + " not a subset of the full table");
    }
    checked = true;
}

const std::vector<std::uint64_t>& IndexTables::all() {
    self_check();
    return kAll;
}

const std::vector<std::uint64_t>& IndexTables::for_prime(unsigned p) {
    self_check();
    auto it = kPerPrime.find(p);
    if (it == kPerPrime.end()) throw std::out_of_range("no index table for p=" + std::to_string(p));
    return it->second;
}

const std::vector<unsigned>& IndexTables::primes() { return kPrimes; }

bool IndexTables::in_Ip(std::uint64_t index, unsigned p) {
    const auto& v = for_prime(p);
    return std::binary_search(v.begin(), v.end(), index);
}

bool IndexTables::in_conjectured_set(std::uint64_t index) {
    self_check();
    return std::binary_search(kAll.begin(), kAll.end(), index);
}

std::uint64_t m0(std::uint64_t m) {
    auto f = Factorization::of(m);
    for (auto& [l, e] : f.primes) {
        (void)e;
        if (l % 5 == 1 || l % 5 == 4)
            throw PrimeCongruenceViolation("prime " + std::to_string(l) + " dividing m is +-1 mod 5");
    }
    std::uint64_t prod = 1;
    for (auto& [l, e] : f.primes) {
        std::uint64_t q = 1;
        for (unsigned i = 0; i < 2 * e + 1; ++i) q *= l;
        prod *= q;
    }
    std::uint64_t base = 216;  // 2^3 * 3^3
    std::uint64_t g = gcd_u64(base, prod);
    return base / g * prod;
}

M0Certificate commutators_equal(const Subgroup& h, const Subgroup& g, std::uint64_t m,
                                const StabilizationConfig& cfg) {
    M0Certificate cert;
    cert.m = m;
    std::ostringstream log;

    residue_t glevel = level(g);
    if (m % glevel != 0)
        throw ModulusMismatch("commutators_equal: m is not a multiple of the level of G");
    cert.m0_value = m0(m);
    if (cert.m0_value > 0xffff)
        throw ModulusMismatch("commutators_equal: m0 = " + std::to_string(cert.m0_value) +
                              " exceeds the supported modulus range");
    residue_t m0r = residue_t(cert.m0_value);

    // H <= G at a joint modulus
    {
        std::uint64_t joint = std::uint64_t(h.modulus()) / gcd_u64(h.modulus(), g.modulus()) * g.modulus();
        Subgroup gj = image_at(g, residue_t(joint));
        Subgroup hj = image_at(h, residue_t(joint));
        if (!gj.contains_subgroup(hj))
            throw std::invalid_argument("commutators_equal: H is not contained in G");
    }

    // condition (1): SL2(F_l) <= H mod l for every prime l not dividing m0.
    // For primes away from H's presentation the full-preimage convention makes
    // the mod-l image all of GL2; only presentation primes need checking.
    cert.condition1 = true;
    for (auto& [l, e] : Factorization::of(h.modulus()).primes) {
        (void)e;
        if (cert.m0_value % l == 0) continue;
        cert.condition1_primes.push_back(unsigned(l));
        Subgroup hl = image_at(h, residue_t(l));
        ElementList sl2 = Subgroup::sl2(residue_t(l)).elements();
        bool contains = true;
        for (packed_t v : sl2.elems)
            if (!hl.elements().contains(v)) { contains = false; break; }
        log << "l=" << l << (contains ? " SL2 contained; " : " SL2 NOT contained; ");
        if (!contains) cert.condition1 = false;
    }

    // condition (2): commutator subgroups mod m0 agree
    auto ch = commutator_subgroup(image_at(h, m0r), cfg.closure_cap);
    auto cg = commutator_subgroup(image_at(g, m0r), cfg.closure_cap);
    cert.condition2 = ch.elems.elems == cg.elems.elems;
    log << "commutators mod " << cert.m0_value << ": |H'|=" << ch.elems.size()
        << " |G'|=" << cg.elems.size() << (cert.condition2 ? " equal" : " different");

    cert.equal = cert.condition1 && cert.condition2;
    cert.transcript = log.str();
    return cert;
}

AdelicIndexReport adelic_index_isogeny(const Subgroup& g6, const Subgroup& gp, unsigned p,
                                       const StabilizationConfig& cfg) {
    if (p != 5 && p != 7 && p != 13)
        throw std::invalid_argument("adelic_index_isogeny: p must be 5, 7, or 13");
    // the p-side must sit inside a Borel preimage
    Subgroup gpl = image_at(gp, residue_t(p));
    if (!rational_isogeny_test(gpl, residue_t(p)))
        throw std::invalid_argument("adelic_index_isogeny: p-adic factor is not inside a Borel preimage");

    AdelicIndexReport rep;
    rep.p = p;
    rep.factor6 = commutator_index_6adic(g6, cfg);
    rep.factorp = commutator_index_padic(gp, residue_t(p), cfg);
    rep.index = rep.factor6.index_in_sl2 * rep.factorp.index_in_sl2;
    rep.in_table = IndexTables::in_Ip(rep.index, p);
    return rep;
}

AdelicIndexReport adelic_index_23(const Subgroup& g6, unsigned p, const StabilizationConfig& cfg) {
    if (p != 2 && p != 3) throw std::invalid_argument("adelic_index_23: p must be 2 or 3");
    AdelicIndexReport rep;
    rep.p = p;
    rep.factor6 = commutator_index_6adic(g6, cfg);
    rep.index = rep.factor6.index_in_sl2;
    rep.in_table = IndexTables::in_Ip(rep.index, p);
    return rep;
}

std::uint64_t adelic_index_with_delta(std::uint64_t index2, std::uint64_t index3, std::uint64_t delta) {
    return index2 * index3 * delta;
}

}  // namespace gl2
