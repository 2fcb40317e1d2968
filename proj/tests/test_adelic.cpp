#include "doctest.h"

#include <random>

#include "gl2/adelic.hpp"
#include "gl2/constructions.hpp"

using namespace gl2;

TEST_CASE("index tables") {
    IndexTables::self_check();
    CHECK(IndexTables::all().size() == 48);
    CHECK(IndexTables::in_Ip(480, 11));
    CHECK(IndexTables::in_Ip(2736, 37));
    CHECK_FALSE(IndexTables::in_Ip(2304, 2));
    CHECK_FALSE(IndexTables::in_Ip(432, 3));
    CHECK_FALSE(IndexTables::in_Ip(3888, 3));
    CHECK(IndexTables::in_conjectured_set(182));
    CHECK_FALSE(IndexTables::in_conjectured_set(183));
    CHECK_THROWS_AS(IndexTables::for_prime(19), std::out_of_range);
}

TEST_CASE("m0 formula") {
    CHECK(m0(6) == 216);
    CHECK(m0(12) == 864);
    CHECK(m0(10) == 27000);
    CHECK_THROWS_AS(m0(22), PrimeCongruenceViolation);  // 11 = +1 mod 5
    CHECK_THROWS_AS(m0(19), PrimeCongruenceViolation);  // 19 = -1 mod 5
    // divisibility consequences
    for (std::uint64_t m : {2, 3, 6, 12, 18, 8, 7, 13, 21}) {
        std::uint64_t v = m0(m);
        CHECK(v % 216 == 0);
        CHECK(v % m == 0);
    }
}

TEST_CASE("commutators_equal on identical groups") {
    Subgroup g = Subgroup::full(6);
    auto cert = commutators_equal(g, g, 6);
    CHECK(cert.equal);
    CHECK(cert.m0_value == 216);
    CHECK(cert.condition1);
    CHECK(cert.condition2);
}

TEST_CASE("commutators_equal detects smaller commutators") {
    // H = preimage of SL2(Z/6)·<diag pieces> with deliberately abelianized
    // 2-part: an index-2 subgroup whose commutator shrinks mod m0
    Subgroup g = Subgroup::full(6);
    // kernel of the sign character of GL2(F2) (lifted to modulus 6): its mod-2
    // image is cyclic of order 3, so SL2(F2) is not inside H mod 2
    std::vector<Mat2> gens;
    gens.push_back(crt_join({Mat2(2, 1, 1, 1, 0), Mat2::identity(3)}));  // order 3 mod 2
    gens.push_back(crt_join({Mat2::identity(2), Mat2(3, 1, 1, 0, 1)}));
    gens.push_back(crt_join({Mat2::identity(2), Mat2(3, 1, 0, 1, 1)}));
    gens.push_back(crt_join({Mat2::identity(2), Mat2(3, 2, 0, 0, 1)}));
    Subgroup h(6, gens);
    REQUIRE(Subgroup::full(6).contains_subgroup(h));
    auto cert = commutators_equal(h, g, 6);
    CHECK_FALSE(cert.equal);
}

TEST_CASE("adelic index via the product formula") {
    auto r13 = adelic_index_isogeny(Subgroup::full(6), borel(13), 13);
    CHECK(r13.index == 336);
    CHECK(r13.in_table);

    auto rsp5 = adelic_index_isogeny(Subgroup::full(6), cartan(5, CartanKind::Split), 5);
    CHECK(rsp5.index == 1200);
    CHECK(rsp5.in_table);

    auto r25 = adelic_index_isogeny(Subgroup::full(6), borel(25), 5);
    CHECK(r25.index == 1200);

    auto r7 = adelic_index_isogeny(Subgroup::full(6), borel(7), 7);
    CHECK(r7.index == 96);

    auto r23 = adelic_index_23(Subgroup::full(6), 2);
    CHECK(r23.index == 2);
    CHECK_FALSE(r23.in_table);  // 2 is not attained with a 2-isogeny

    CHECK(adelic_index_with_delta(12, 4, 2) == 96);
}

TEST_CASE("adelic_index_isogeny rejects non-Borel p-parts") {
    CHECK_THROWS_AS(adelic_index_isogeny(Subgroup::full(6), Subgroup::full(5), 5),
                    std::invalid_argument);
    CHECK_THROWS_AS(adelic_index_isogeny(Subgroup::full(6), borel(11), 11), std::invalid_argument);
}

TEST_CASE("randomized commutator equality pairs") {
    // G arbitrary open of small level, H = full preimage of G at a larger
    // modulus: commutators must agree
    std::mt19937_64 rng(42);
    int done = 0;
    while (done < 20) {
        residue_t n = (done % 2) ? 6 : 12;
        // random subgroup of GL2(Z/n) containing a spread of elements
        std::vector<Mat2> gens;
        for (int i = 0; i < 3; ++i) {
            Mat2 m(n, std::int64_t(rng() % n), std::int64_t(rng() % n), std::int64_t(rng() % n),
                   std::int64_t(rng() % n));
            if (m.invertible()) gens.push_back(m);
        }
        if (gens.empty()) continue;
        Subgroup g(n, gens);
        if (!g.det_image_full()) continue;  // keep the m0 hypotheses comfortable
        Subgroup h = lift_full_preimage(g, residue_t(n * 6));
        auto cert = commutators_equal(h, g, n);
        CHECK(cert.equal);
        ++done;
    }
}
