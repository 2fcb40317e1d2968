#include "doctest.h"

#include "gl2/constructions.hpp"
#include "gl2/curve.hpp"

using namespace gl2;

namespace {
void check_named(const Subgroup& g, std::uint64_t index, std::uint64_t genus) {
    CurveInvariants inv = curve_invariants(g);
    CHECK(inv.psl2_index == index);
    CHECK(inv.genus == genus);
}
}  // namespace

TEST_CASE("j-line") {
    CurveInvariants inv = curve_invariants(Subgroup::full(2));
    // full group: the modular curve is the j-line
    CHECK(curve_invariants(Subgroup::full(6)).psl2_index == 1);
    CHECK(curve_invariants(Subgroup::full(6)).genus == 0);
    (void)inv;
}

TEST_CASE("X0(5) fine data") {
    CurveInvariants inv = curve_invariants(borel(5));
    CHECK(inv.psl2_index == 6);
    CHECK(inv.genus == 0);
    CHECK(inv.cusp_count == 2);
    CHECK(inv.epsilon2 == 2);
    CHECK(inv.epsilon3 == 0);
    CHECK(inv.rational_cusp_count == 2);
}

TEST_CASE("named modular curve invariants: Borel") {
    check_named(borel(7), 8, 0);
    check_named(borel(11), 12, 1);
    check_named(borel(13), 14, 0);
    check_named(borel(17), 18, 1);
    check_named(borel(37), 38, 2);
}

TEST_CASE("named modular curve invariants: Cartan normalizers") {
    check_named(cartan_normalizer(5, CartanKind::Nonsplit), 10, 0);
    check_named(cartan_normalizer(7, CartanKind::Nonsplit), 21, 0);
    check_named(cartan_normalizer(7, CartanKind::Split), 28, 0);
    check_named(cartan_normalizer(11, CartanKind::Nonsplit), 55, 1);
    check_named(cartan_normalizer(19, CartanKind::Nonsplit), 171, 8);
    check_named(cartan_normalizer(23, CartanKind::Nonsplit), 253, 13);
}

TEST_CASE("named modular curve invariants: S4") {
    check_named(s4_normalizer(5), 5, 0);
    check_named(s4_normalizer(13), 91, 3);
}

TEST_CASE("split Cartan X_sp(5) and X0(25)") {
    check_named(cartan(5, CartanKind::Split), 30, 0);
    check_named(borel(25), 30, 0);
}

TEST_CASE("fiber product invariants") {
    // X0(2) x Xns+(7)
    CurveInvariants a = fiber_invariants(borel(2), cartan_normalizer(7, CartanKind::Nonsplit));
    CHECK(a.psl2_index == 63);
    CHECK(a.genus == 2);
    // X0(3) x Xns+(5)
    CurveInvariants b = fiber_invariants(borel(3), cartan_normalizer(5, CartanKind::Nonsplit));
    CHECK(b.psl2_index == 40);
    CHECK(b.genus == 2);
    // X0(5) x X0(7)
    CurveInvariants c = fiber_invariants(borel(5), borel(7));
    CHECK(c.psl2_index == 48);
    CHECK(c.genus == 3);
}

TEST_CASE("index monotonicity under containment") {
    Subgroup b5 = borel(5);
    CurveInvariants big = curve_invariants(Subgroup::full(5));
    CurveInvariants small = curve_invariants(b5);
    CHECK(small.psl2_index % big.psl2_index == 0);
    Subgroup c5 = cartan(5, CartanKind::Split);
    Subgroup n5 = cartan_normalizer(5, CartanKind::Split);
    CHECK(curve_invariants(c5).psl2_index % curve_invariants(n5).psl2_index == 0);
}

TEST_CASE("curve keys are conjugation invariant") {
    Subgroup b5 = borel(5);
    REQUIRE(Mat2(5, 2, 1, 1, 1).invertible());
    Subgroup conj = conjugate_subgroup(b5, Mat2(5, 2, 1, 1, 1));
    CHECK(curve_key(b5).str() == curve_key(conj).str());
    CHECK(curve_key(b5).str() != curve_key(cartan(5, CartanKind::Split)).str());
}

TEST_CASE("finiteness verdicts") {
    RankOracle oracle;
    CurveKey k37 = curve_key(borel(37));
    CurveInvariants i37 = curve_invariants(borel(37));
    CHECK(finiteness(k37, i37, oracle).value == Finiteness::Finite);  // genus 2

    CurveKey k5 = curve_key(borel(5));
    CurveInvariants i5 = curve_invariants(borel(5));
    CHECK(finiteness(k5, i5, oracle).value == Finiteness::Unknown);
    oracle.add(k5.str(), Finiteness::Infinite, "genus 0 with a rational cusp");
    CHECK(finiteness(k5, i5, oracle).value == Finiteness::Infinite);
}
