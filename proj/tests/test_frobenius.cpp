#include "doctest.h"

#include "gl2/constructions.hpp"
#include "gl2/frobenius.hpp"

using namespace gl2;

namespace {
CurveFixture curve(const char* label, std::int64_t a1, std::int64_t a2, std::int64_t a3,
                   std::int64_t a4, std::int64_t a6, unsigned p = 2, std::uint64_t idx = 12) {
    return CurveFixture{label, a1, a2, a3, a4, a6, p, idx};
}
}  // namespace

TEST_CASE("point counting on y^2 = x^3 + x + 1 over F_5") {
    CurveFixture e = curve("test", 0, 0, 0, 1, 1);
    CHECK(ap(e, 5) == -3);  // 9 points
}

TEST_CASE("Hasse bound and bad reduction") {
    CurveFixture e = curve("11a3", 0, -1, 1, 0, 0);  // conductor 11
    for (std::uint64_t q : good_primes(e, 30)) {
        std::int64_t a = ap(e, q);
        CHECK(a * a <= std::int64_t(4 * q));
    }
    CHECK_THROWS_AS(ap(e, 11), BadReductionAt);
}

TEST_CASE("signatures") {
    CurveFixture e = curve("test", 0, 0, 0, 1, 1);
    auto s = signature(e, 5, 7);
    CHECK(s.trace_mod == 4);  // -3 mod 7
    CHECK(s.det_mod == 5);
    auto s2 = signature(e, 5, 2);
    CHECK(s2.trace_mod == 1);  // parity of a_5 = -3
    auto s3 = signature(e, 7, 3);
    CHECK(s3.det_mod == 1);  // 7 = 1 mod 3
}

TEST_CASE("consistency with the full group always holds") {
    CurveFixture e = curve("test", 0, 0, 0, 1, 1);
    auto primes = good_primes(e, 20);
    auto r = consistent_with(e, Subgroup::full(7), primes);
    CHECK(r.consistent);
}

TEST_CASE("borel consistency of a 13-isogeny curve, and a refutation") {
    // 147.b1 admits a rational 13-isogeny
    CurveFixture e = curve("147.b1", 0, -1, 1, -912, 10919, 13, 336);
    auto primes = good_primes(e, 50);
    CHECK(consistent_with(e, borel(13), primes).consistent);

    // a curve with surjective mod-7 image is not Borel-consistent at 7
    CurveFixture f = curve("11a3", 0, -1, 1, 0, 0);
    auto fr = consistent_with(f, borel(7), good_primes(f, 50));
    CHECK_FALSE(fr.consistent);
    CHECK(fr.witness_prime > 0);
    // the witness certificate: the charpoly of Frobenius is irreducible mod 7
    auto s = signature(f, fr.witness_prime, 7);
    std::uint64_t disc = (std::uint64_t(s.trace_mod) * s.trace_mod + 4ull * 7 - 4 * s.det_mod) % 7;
    bool square = false;
    for (std::uint64_t y = 0; y < 7; ++y)
        if (y * y % 7 == disc) square = true;
    CHECK_FALSE(square);
}

TEST_CASE("mod-ell surjectivity evidence") {
    CurveFixture f = curve("11a3", 0, -1, 1, 0, 0);  // surjective for all ell != 5
    auto primes = good_primes(f, 60);
    CHECK(mod_ell_surjective_evidence(f, 7, primes));
    CHECK(mod_ell_surjective_evidence(f, 13, primes));
    // 11a3 has a rational 5-isogeny: mod-5 image inside a Borel
    CHECK_FALSE(mod_ell_surjective_evidence(f, 5, primes));
}
