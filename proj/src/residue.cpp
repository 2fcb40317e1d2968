#include "gl2/residue.hpp"

#include <sstream>

namespace gl2 {

residue_t inv_mod(residue_t a, residue_t n) {
    std::int64_t t = 0, newt = 1;
    std::int64_t r = n, newr = a % n;
    while (newr != 0) {
        std::int64_t q = r / newr;
        std::int64_t tmp = t - q * newt; t = newt; newt = tmp;
        tmp = r - q * newr; r = newr; newr = tmp;
    }
    if (r != 1) throw NotInGL2("non-unit " + std::to_string(a) + " mod " + std::to_string(n));
    if (t < 0) t += n;
    return static_cast<residue_t>(t);
}

bool is_unit_mod(residue_t a, residue_t n) { return gcd_u64(a % n, n) == 1; }

std::uint64_t euler_phi(std::uint64_t n) {
    std::uint64_t r = n;
    for (auto& [p, e] : Factorization::of(n).primes) { (void)e; r -= r / p; }
    return r;
}

Factorization Factorization::of(std::uint64_t n) {
    Factorization f;
    f.n = n;
    std::uint64_t m = n;
    for (std::uint64_t p = 2; p * p <= m; ++p) {
        if (m % p == 0) {
            unsigned e = 0;
            while (m % p == 0) { m /= p; ++e; }
            f.primes.emplace_back(p, e);
        }
    }
    if (m > 1) f.primes.emplace_back(m, 1);
    return f;
}

std::uint64_t Factorization::prime_power(std::uint64_t p) const {
    for (auto& [q, e] : primes)
        if (q == p) {
            std::uint64_t r = 1;
            for (unsigned i = 0; i < e; ++i) r *= q;
            return r;
        }
    return 1;
}

std::uint64_t gl2_order(std::uint64_t n) {
    if (n == 1) return 1;
    std::uint64_t r = 1;
    for (auto& [p, e] : Factorization::of(n).primes) {
        std::uint64_t q = 1;
        for (unsigned i = 0; i + 1 < e; ++i) q *= p;  // p^(e-1)
        std::uint64_t pe1 = q;                        // p^(e-1)
        // |GL2(Z/p^e)| = p^(4(e-1)) (p^2-1)(p^2-p)
        r *= pe1 * pe1 * pe1 * pe1 * (p * p - 1) * (p * p - p);
    }
    return r;
}

std::uint64_t sl2_order(std::uint64_t n) {
    if (n == 1) return 1;
    std::uint64_t r = 1;
    for (auto& [p, e] : Factorization::of(n).primes) {
        std::uint64_t pe1 = 1;
        for (unsigned i = 0; i + 1 < e; ++i) pe1 *= p;
        // |SL2(Z/p^e)| = p^(3(e-1)) p (p^2-1)
        r *= pe1 * pe1 * pe1 * p * (p * p - 1);
    }
    return r;
}

Mat2 mat_mul(const Mat2& x, const Mat2& y) {
    if (x.n != y.n) throw ModulusMismatch("mat_mul: " + std::to_string(x.n) + " vs " + std::to_string(y.n));
    return Mat2::unpack(packed_mul(x.pack(), y.pack(), x.n), x.n);
}

Mat2 mat_inv(const Mat2& x) {
    residue_t di = inv_mod(x.det(), x.n);  // throws NotInGL2 on non-unit
    std::uint64_t n = x.n;
    Mat2 r;
    r.n = x.n;
    r.a = residue_t(std::uint64_t(x.d) * di % n);
    r.b = residue_t((n - std::uint64_t(x.b) % n) * di % n);
    r.c = residue_t((n - std::uint64_t(x.c) % n) * di % n);
    r.d = residue_t(std::uint64_t(x.a) * di % n);
    return r;
}

Mat2 mat_pow(Mat2 x, std::uint64_t e) {
    Mat2 r = Mat2::identity(x.n);
    while (e) {
        if (e & 1) r = mat_mul(r, x);
        x = mat_mul(x, x);
        e >>= 1;
    }
    return r;
}

Mat2 mat_conj(const Mat2& g, const Mat2& x) { return mat_mul(mat_mul(g, x), mat_inv(g)); }

unsigned mat_order(const Mat2& x) {
    Mat2 p = x;
    unsigned k = 1;
    while (!p.is_identity()) {
        p = mat_mul(p, x);
        ++k;
        if (k > 4u * x.n * x.n) throw NotInGL2("mat_order: not invertible");
    }
    return k;
}

Mat2 mat_reduce(const Mat2& x, residue_t m) {
    if (x.n % m != 0) throw ModulusMismatch("mat_reduce: " + std::to_string(m) + " does not divide " + std::to_string(x.n));
    return Mat2(m, x.a % m, x.b % m, x.c % m, x.d % m);
}

std::vector<Mat2> crt_split(const Mat2& x, const Factorization& f) {
    if (f.n != x.n) throw ModulusMismatch("crt_split: factorization of wrong modulus");
    std::vector<Mat2> parts;
    parts.reserve(f.primes.size());
    for (auto& [p, e] : f.primes) {
        residue_t q = 1;
        for (unsigned i = 0; i < e; ++i) q = residue_t(q * p);
        parts.push_back(mat_reduce(x, q));
    }
    return parts;
}

Mat2 crt_join(const std::vector<Mat2>& parts) {
    if (parts.empty()) throw ModulusMismatch("crt_join: empty input");
    std::uint64_t n = 1;
    for (auto& m : parts) {
        if (gcd_u64(n, m.n) != 1) throw ModulusMismatch("crt_join: moduli not coprime");
        n *= m.n;
    }
    auto crt1 = [&](std::uint64_t pick(const Mat2&)) {
        std::uint64_t x = 0, mod = 1;
        for (auto& m : parts) {
            // solve x' = x mod mod, x' = pick(m) mod m.n
            std::uint64_t a = pick(m) % m.n;
            std::uint64_t minv = inv_mod(residue_t(mod % m.n), m.n);
            std::uint64_t k = (a + m.n - x % m.n) % m.n * minv % m.n;
            x += mod * k;
            mod *= m.n;
        }
        return x;
    };
    Mat2 r;
    r.n = residue_t(n);
    r.a = residue_t(crt1([](const Mat2& m) -> std::uint64_t { return m.a; }));
    r.b = residue_t(crt1([](const Mat2& m) -> std::uint64_t { return m.b; }));
    r.c = residue_t(crt1([](const Mat2& m) -> std::uint64_t { return m.c; }));
    r.d = residue_t(crt1([](const Mat2& m) -> std::uint64_t { return m.d; }));
    return r;
}

std::string Mat2::str() const {
    std::ostringstream os;
    os << a << "," << b << ";" << c << "," << d;
    return os.str();
}

Mat2 Mat2::parse(const std::string& text, residue_t n) {
    long long v[4];
    char sep1 = 0, sep2 = 0, sep3 = 0;
    std::istringstream is(text);
    if (!(is >> v[0] >> sep1 >> v[1] >> sep2 >> v[2] >> sep3 >> v[3]) ||
        sep1 != ',' || sep2 != ';' || sep3 != ',')
        throw std::runtime_error("bad matrix literal '" + text + "'");
    return Mat2(n, v[0], v[1], v[2], v[3]);
}

}  // namespace gl2
