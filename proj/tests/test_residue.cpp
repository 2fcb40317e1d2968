#include "doctest.h"

#include <random>

#include "gl2/constructions.hpp"
#include "gl2/residue.hpp"
#include "gl2/subgroup.hpp"

using namespace gl2;

TEST_CASE("matrix multiplication basics") {
    Mat2 m(5, 1, 1, 0, 1);
    CHECK(mat_mul(Mat2::identity(5), m) == m);
    CHECK(mat_mul(m, m) == Mat2(5, 1, 2, 0, 1));
    Mat2 w(6, 0, 1, 1, 0);
    CHECK(mat_mul(w, w) == Mat2::identity(6));
    CHECK_THROWS_AS(mat_mul(m, w), ModulusMismatch);
}

TEST_CASE("matrix inverse") {
    CHECK(mat_inv(Mat2::identity(7)) == Mat2::identity(7));
    CHECK(mat_inv(Mat2(7, 1, 1, 0, 1)) == Mat2(7, 1, 6, 0, 1));
    CHECK_THROWS_AS(mat_inv(Mat2(6, 2, 0, 0, 1)), NotInGL2);
    Mat2 g(35, 3, 4, 1, 2);
    REQUIRE(g.invertible());
    CHECK(mat_mul(g, mat_inv(g)) == Mat2::identity(35));
}

TEST_CASE("crt split and join") {
    Mat2 m(6, 1, 1, 0, 1);
    auto parts = crt_split(m, Factorization::of(6));
    REQUIRE(parts.size() == 2);
    CHECK(parts[0] == Mat2(2, 1, 1, 0, 1));
    CHECK(parts[1] == Mat2(3, 1, 1, 0, 1));

    Mat2 mi = Mat2::minus_identity(6);
    auto p2 = crt_split(mi, Factorization::of(6));
    CHECK(p2[0] == Mat2::identity(2));
    CHECK(p2[1] == Mat2(3, 2, 0, 0, 2));

    std::mt19937_64 rng(7);
    auto f = Factorization::of(360);
    for (int i = 0; i < 1000; ++i) {
        Mat2 r(360, std::int64_t(rng() % 360), std::int64_t(rng() % 360),
               std::int64_t(rng() % 360), std::int64_t(rng() % 360));
        CHECK(crt_join(crt_split(r, f)) == r);
    }
}

TEST_CASE("gl2 and sl2 orders") {
    CHECK(gl2_order(2) == 6);
    // brute-force count of invertible matrices
    auto brute = [](residue_t n) {
        std::uint64_t c = 0;
        for (residue_t a = 0; a < n; ++a)
            for (residue_t b = 0; b < n; ++b)
                for (residue_t cc = 0; cc < n; ++cc)
                    for (residue_t d = 0; d < n; ++d)
                        if (Mat2(n, a, b, cc, d).invertible()) ++c;
        return c;
    };
    CHECK(gl2_order(5) == 480);
    CHECK(brute(5) == 480);
    CHECK(gl2_order(6) == 288);
    CHECK(brute(6) == 288);
    for (residue_t n = 2; n <= 30; ++n) CHECK(gl2_order(n) == brute(n));
    CHECK(sl2_order(2) == 6);
    CHECK(sl2_order(4) == 48);
    CHECK(sl2_order(8) == 384);
    CHECK(sl2_order(9) == 648);
}

TEST_CASE("det is multiplicative") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
        residue_t n = residue_t(2 + rng() % 97);
        Mat2 x(n, std::int64_t(rng() % n), std::int64_t(rng() % n), std::int64_t(rng() % n), std::int64_t(rng() % n));
        Mat2 y(n, std::int64_t(rng() % n), std::int64_t(rng() % n), std::int64_t(rng() % n), std::int64_t(rng() % n));
        CHECK(mat_mul(x, y).det() == residue_t(std::uint64_t(x.det()) * y.det() % n));
    }
}

TEST_CASE("matrix text form round trip") {
    Mat2 m(11, 3, -1, 0, 4);
    CHECK(m.str() == "3,10;0,4");
    CHECK(Mat2::parse("3,10;0,4", 11) == m);
    CHECK(Mat2::parse("-1,0;0,-1", 11) == Mat2::minus_identity(11));
}

TEST_CASE("closure of GL2(F2)") {
    Subgroup g(2, {Mat2(2, 0, 1, 1, 0), Mat2(2, 1, 1, 0, 1)});
    CHECK(g.order() == 6);
    CHECK(Subgroup::full(2).order() == 6);
    CHECK(Subgroup::trivial(12).order() == 1);
    Subgroup mi(5, {Mat2::minus_identity(5)});
    CHECK(mi.order() == 2);
}

TEST_CASE("full groups have the right order") {
    for (residue_t n : {2, 3, 4, 5, 6, 7, 8, 9, 12, 16, 24, 25, 27, 36}) {
        CHECK(Subgroup::full(n).order() == gl2_order(n));
        CHECK(Subgroup::sl2(n).order() == sl2_order(n));
    }
}

TEST_CASE("crt bijection on GL2 for prime-power and square-free moduli") {
    for (residue_t n : {12, 45, 30, 8, 27}) {
        auto f = Factorization::of(n);
        Subgroup g = Subgroup::full(n);
        PackedSet joined(g.order());
        std::size_t count = 0;
        g.elements().contains(0);  // force cache
        for (packed_t v : g.elements().elems) {
            Mat2 m = Mat2::unpack(v, n);
            Mat2 back = crt_join(crt_split(m, f));
            CHECK(back == m);
            if (joined.insert(back.pack())) ++count;
        }
        CHECK(count == gl2_order(n));
    }
}

TEST_CASE("reduce and lift") {
    Subgroup g6 = Subgroup::full(6);
    CHECK(reduce(g6, 2).order() == 6);

    Subgroup b5 = borel(5);
    CHECK(b5.order() == 80);
    CHECK(b5.index_in_gl2() == 6);
    Subgroup b5l = lift_full_preimage(b5, 25);
    CHECK(b5l.order() == 80u * 625);
    CHECK(reduce(b5l, 5).same_group(b5));
    CHECK(level(b5l) == 5);
    CHECK(level(Subgroup::full(12)) == 1);
}

TEST_CASE("level of -I extension mod 8") {
    Subgroup g(8, {Mat2::minus_identity(8)});
    // <-I> mod 8 is not preimage-closed from any smaller level...
    residue_t l = level(g);
    // the full preimage convention: this descriptor means preimage of <-I> mod 8
    Subgroup again = lift_full_preimage(reduce(g, l), 8);
    CHECK(again.order() == g.order());
}

TEST_CASE("congruence kernels have full rank") {
    CHECK(closure(4, congruence_kernel_generators(4, 2)).size() == 16);
    CHECK(closure(8, congruence_kernel_generators(8, 2)).size() == 256);
    CHECK(closure(9, congruence_kernel_generators(9, 3)).size() == 81);
    CHECK(closure(8, congruence_kernel_generators(8, 4)).size() == 16);
    CHECK(closure(27, congruence_kernel_generators(27, 9)).size() == 81);
    // dropping to a proper subset of primes adjoins the full new component
    CHECK(closure(6, congruence_kernel_generators(6, 2)).size() == 48);
}

TEST_CASE("commutator subgroups of small groups") {
    auto c2 = commutator_subgroup(Subgroup::full(2));
    CHECK(c2.elems.size() == 3);  // cyclic of order 3 inside GL2(F2)
    auto c3 = commutator_subgroup(Subgroup::full(3));
    CHECK(c3.elems.size() == 24);  // SL2(F3)
    // abelian group: trivial commutator
    auto ab = commutator_subgroup(Subgroup(5, {Mat2(5, 2, 0, 0, 1), Mat2(5, 1, 0, 0, 3)}));
    CHECK(ab.elems.size() == 1);
    // commutator group descriptor closure matches the enumerated set
    CHECK(c3.group.order() == 24);
}

TEST_CASE("commutator commutes with reduction") {
    std::mt19937_64 rng(23);
    for (residue_t n : {12, 36, 72, 20, 50}) {
        Subgroup g = Subgroup::full(n);
        for (auto m : Factorization::of(n).primes) {
            residue_t target = residue_t(n / m.first);
            if (target == 1) continue;
            auto a = commutator_subgroup(reduce(g, target)).elems;
            auto b = commutator_subgroup(g).elems;
            // reduce b to target
            PackedSet reduced(b.size());
            for (packed_t v : b.elems) reduced.insert(mat_reduce(Mat2::unpack(v, n), target).pack());
            CHECK(reduced.sorted() == a.elems);
        }
    }
}

TEST_CASE("subgroup_from_elements reproduces groups") {
    Subgroup b7 = borel(7);
    Subgroup again = subgroup_from_elements(7, b7.elements().elems);
    CHECK(again.same_group(b7));
}
