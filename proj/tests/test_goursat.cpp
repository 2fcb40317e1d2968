#include "doctest.h"

#include "gl2/constructions.hpp"
#include "gl2/goursat.hpp"

using namespace gl2;

namespace {
// S3 inside GL2(F3): generated by an involution and a 3-cycle
Subgroup s3_mod3() { return Subgroup(3, {Mat2(3, 0, 1, 1, 0), Mat2(3, 0, -1, 1, -1)}); }
}  // namespace

TEST_CASE("fiber product with trivial quotient is the direct product") {
    Subgroup a = Subgroup::full(2);
    Subgroup b = s3_mod3();
    QuotientMatch q;
    q.order = 1;
    q.kernel_a = a;
    q.kernel_b = b;
    auto sp = fiber_product(a, b, q);
    CHECK(sp.joint.order() == 36);
    CHECK(goursat_quotient_order(sp) == 1);
}

TEST_CASE("diagonal fiber product of S3 with itself") {
    Subgroup a = Subgroup::full(2);  // GL2(F2) = S3
    Subgroup b = s3_mod3();
    // full matching: Q = S3 itself; pair the generators
    QuotientMatch q;
    q.order = 6;
    q.kernel_a = Subgroup::trivial(2);
    q.kernel_b = Subgroup::trivial(3);
    q.pairing = {{Mat2(2, 0, 1, 1, 0), Mat2(3, 0, 1, 1, 0)},
                 {Mat2(2, 1, 1, 1, 0), Mat2(3, 0, -1, 1, -1)}};
    auto sp = fiber_product(a, b, q);
    CHECK(sp.joint.order() == 6);  // the graph of an isomorphism
    CHECK(goursat_quotient_order(sp) == 6);
}

TEST_CASE("sign-matched subdirect product of GL2(F2) x S3") {
    // Q = Z/2 via the sign maps on both sides
    Subgroup a = Subgroup::full(2);
    Subgroup b = s3_mod3();
    auto common = common_quotient_orders(a, b, 16);
    REQUIRE(common.count(2) == 1);
    auto sp = fiber_product(a, b, common[2]);
    CHECK(sp.joint.order() == 36 / 2);
    CHECK(goursat_quotient_order(sp) == 2);
    CHECK(delta_entanglement(sp) == 2);
    // the quotients of S3 have orders 1, 2, 6: no order-3 common quotient
    CHECK(common.count(1) == 1);
    CHECK(common.count(3) == 0);
    CHECK(common.count(6) == 1);
}

TEST_CASE("coprime orders have only the trivial common quotient") {
    Subgroup a(4, {Mat2(4, 0, 3, 1, 0)});  // order-4 cyclic
    Subgroup b(3, {Mat2(3, 1, 1, 0, 1)});  // order-3 cyclic
    auto common = common_quotient_orders(a, b);
    CHECK(common.size() == 1);
    CHECK(common.count(1) == 1);
}

TEST_CASE("normal subgroup enumeration") {
    Subgroup s3 = Subgroup::full(2);
    auto ns = normal_subgroups(s3);
    CHECK(ns.size() == 3);  // 1, A3, S3
    Subgroup gl23 = Subgroup::full(3);
    auto ns3 = normal_subgroups(gl23);
    // GL2(F3): 1, Z, Q8, SL2(F3), GL2(F3)
    CHECK(ns3.size() == 5);
    // index bound filters
    CHECK(normal_subgroups(gl23, 2).size() == 2);  // GL2 and SL2
}

TEST_CASE("subdirect enumeration with trivial quotient filter") {
    Subgroup a = Subgroup::full(2);
    Subgroup b = s3_mod3();
    auto subs = enumerate_subdirect_products(a, b, 64);
    std::size_t trivial = 0;
    for (auto& sp : subs) {
        CHECK(goursat_quotient_order(sp) == sp.quotient_order);
        if (sp.quotient_order == 1) ++trivial;
    }
    CHECK(trivial == 1);  // only A x B itself
    // nontrivial gluings exist: sign (Q=2), rotation (Q=3), full (Q=6)
    CHECK(subs.size() >= 4);
}

TEST_CASE("coprime commutator triviality") {
    CHECK(coprime_commutator_triviality(Subgroup::full(36), lift_full_preimage(borel(5), 25), 5));
    CHECK(coprime_commutator_triviality(Subgroup::full(12), lift_full_preimage(borel(7), 49), 7));
    CHECK_THROWS_AS(coprime_commutator_triviality(Subgroup::full(6), borel(3), 3), Unsupported);
}

TEST_CASE("Goursat order identity on constructed products") {
    Subgroup a = Subgroup::full(4);
    Subgroup b = Subgroup::full(3);
    auto common = common_quotient_orders(a, b, 16);
    for (auto& [q, match] : common) {
        auto sp = fiber_product(a, b, match);
        CHECK(goursat_quotient_order(sp) == q);
        CHECK(sp.joint.order() * q == a.order() * b.order());
    }
}
