#include "doctest.h"

#include "gl2/commutator.hpp"
#include "gl2/constructions.hpp"

using namespace gl2;

TEST_CASE("p-adic commutator indices of Borel preimages") {
    // stabilized [SL2(Z_p) : K'] for the full preimages of the Borels
    auto r5 = commutator_index_padic(borel(5), 5);
    CHECK(r5.index_in_sl2 == 24);
    CHECK(r5.certificate);

    auto r7 = commutator_index_padic(borel(7), 7);
    CHECK(r7.index_in_sl2 == 48);

    auto r13 = commutator_index_padic(borel(13), 13);
    CHECK(r13.index_in_sl2 == 168);
}

TEST_CASE("p-adic commutator indices of the 600 cases") {
    auto rsp = commutator_index_padic(cartan(5, CartanKind::Split), 5);
    CHECK(rsp.index_in_sl2 == 600);
    auto r25 = commutator_index_padic(borel(25), 5);
    CHECK(r25.index_in_sl2 == 600);
}

TEST_CASE("6-adic commutator index of the full group") {
    auto r = commutator_index_6adic(Subgroup::full(6));
    CHECK(r.index_in_sl2 == 2);
    CHECK(r.certificate);
}

TEST_CASE("full p-adic groups have commutator index 1") {
    auto r = commutator_index_padic(Subgroup::full(5), 5);
    CHECK(r.index_in_sl2 == 1);
    auto r3 = commutator_index_padic(Subgroup::full(3), 3);
    CHECK(r3.index_in_sl2 == 1);
}

TEST_CASE("index at consecutive moduli agrees after stabilization") {
    auto r = commutator_index_padic(borel(5), 5);
    residue_t m = r.stabilized_modulus;
    // recompute the plain finite-level index at m and at m*5
    Subgroup g5 = image_at(borel(5), m);
    auto c1 = commutator_subgroup(g5);
    CHECK(sl2_order(m) / c1.elems.size() == r.index_in_sl2);
    Subgroup g25 = image_at(borel(5), residue_t(m * 5));
    auto c2 = commutator_subgroup(g25);
    CHECK(sl2_order(residue_t(m * 5)) / c2.elems.size() == r.index_in_sl2);
}

TEST_CASE("Lemma-style prime support of commutator orders") {
    // 6-adic commutators have only 2,3 in their order; Borel-preimage
    // commutators at p are p-groups
    auto c6 = commutator_subgroup(Subgroup::full(36));
    auto f6 = Factorization::of(c6.elems.size());
    for (auto& [p, e] : f6.primes) CHECK((p == 2 || p == 3));

    for (residue_t p : {5, 7}) {
        Subgroup pre = image_at(borel(p), residue_t(p * p));
        auto c = commutator_subgroup(pre);
        auto f = Factorization::of(c.elems.size());
        for (auto& [q, e] : f.primes) CHECK(q == p);
    }
}
