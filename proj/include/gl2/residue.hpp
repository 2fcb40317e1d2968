#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gl2 {

// All moduli fit in 16 bits; every modulus used by the computations here
// is at most 50653 = 37^3.  Entries are stored reduced to [0, n).
using residue_t = std::uint32_t;
using packed_t  = std::uint64_t;

struct NotInGL2 : std::runtime_error {
    explicit NotInGL2(const std::string& what) : std::runtime_error(what) {}
};

struct ModulusMismatch : std::runtime_error {
    explicit ModulusMismatch(const std::string& what) : std::runtime_error(what) {}
};

inline std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) {
    while (b) { std::uint64_t t = a % b; a = b; b = t; }
    return a;
}

// Inverse of a modulo n, throwing if gcd(a, n) != 1.
residue_t inv_mod(residue_t a, residue_t n);
bool is_unit_mod(residue_t a, residue_t n);
std::uint64_t euler_phi(std::uint64_t n);

struct Factorization {
    std::uint64_t n = 1;
    std::vector<std::pair<std::uint64_t, unsigned>> primes;  // ascending, exponent >= 1

    static Factorization of(std::uint64_t n);
    std::uint64_t prime_power(std::uint64_t p) const;  // p^ord_p(n), or 1
};

// |GL_2(Z/nZ)| and |SL_2(Z/nZ)|, multiplicative over prime powers.
std::uint64_t gl2_order(std::uint64_t n);
std::uint64_t sl2_order(std::uint64_t n);

// 2x2 matrix over Z/nZ, row-major [[a,b],[c,d]].
struct Mat2 {
    residue_t n = 1;
    residue_t a = 0, b = 0, c = 0, d = 0;

    Mat2() = default;
    Mat2(residue_t n_, std::int64_t a_, std::int64_t b_, std::int64_t c_, std::int64_t d_)
        : n(n_),
          a(static_cast<residue_t>(((a_ % n_) + n_) % n_)),
          b(static_cast<residue_t>(((b_ % n_) + n_) % n_)),
          c(static_cast<residue_t>(((c_ % n_) + n_) % n_)),
          d(static_cast<residue_t>(((d_ % n_) + n_) % n_)) {}

    static Mat2 identity(residue_t n) { return Mat2(n, 1, 0, 0, 1); }
    static Mat2 minus_identity(residue_t n) { return Mat2(n, -1, 0, 0, -1); }

    residue_t det() const {
        std::uint64_t ad = std::uint64_t(a) * d % n;
        std::uint64_t bc = std::uint64_t(b) * c % n;
        return static_cast<residue_t>((ad + n - bc) % n);
    }
    residue_t trace() const { return static_cast<residue_t>((std::uint64_t(a) + d) % n); }
    bool invertible() const { return is_unit_mod(det(), n); }
    bool is_identity() const { return a == 1 % n && b == 0 && c == 0 && d == 1 % n; }

    // Packs the four entries into 16-bit lanes; the modulus is carried by context.
    packed_t pack() const {
        return (packed_t(a) << 48) | (packed_t(b) << 32) | (packed_t(c) << 16) | packed_t(d);
    }
    static Mat2 unpack(packed_t v, residue_t n) {
        Mat2 m;
        m.n = n;
        m.a = residue_t(v >> 48); m.b = residue_t((v >> 32) & 0xffff);
        m.c = residue_t((v >> 16) & 0xffff); m.d = residue_t(v & 0xffff);
        return m;
    }

    bool operator==(const Mat2& o) const { return n == o.n && a == o.a && b == o.b && c == o.c && d == o.d; }
    bool operator!=(const Mat2& o) const { return !(*this == o); }

    // Text form "a,b;c,d" used by all data files.
    std::string str() const;
    static Mat2 parse(const std::string& text, residue_t n);
};

Mat2 mat_mul(const Mat2& x, const Mat2& y);
Mat2 mat_inv(const Mat2& x);
Mat2 mat_pow(Mat2 x, std::uint64_t e);
// Conjugate g x g^{-1}.
Mat2 mat_conj(const Mat2& g, const Mat2& x);
// Multiplicative order of x in GL_2(Z/nZ).
unsigned mat_order(const Mat2& x);

// Entrywise reduction to a divisor modulus.
Mat2 mat_reduce(const Mat2& x, residue_t m);

// CRT split of x across the prime-power factors of f (which must factor x.n),
// and the inverse join.
std::vector<Mat2> crt_split(const Mat2& x, const Factorization& f);
Mat2 crt_join(const std::vector<Mat2>& parts);

// Fast packed multiplication: all lanes reduced mod n.
inline packed_t packed_mul(packed_t x, packed_t y, residue_t n) {
    std::uint64_t xa = x >> 48, xb = (x >> 32) & 0xffff, xc = (x >> 16) & 0xffff, xd = x & 0xffff;
    std::uint64_t ya = y >> 48, yb = (y >> 32) & 0xffff, yc = (y >> 16) & 0xffff, yd = y & 0xffff;
    std::uint64_t a = (xa * ya + xb * yc) % n;
    std::uint64_t b = (xa * yb + xb * yd) % n;
    std::uint64_t c = (xc * ya + xd * yc) % n;
    std::uint64_t d = (xc * yb + xd * yd) % n;
    return (a << 48) | (b << 32) | (c << 16) | d;
}

}  // namespace gl2
