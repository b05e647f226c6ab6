#pragma once

#include <gmpxx.h>

#include <string>

#include "kps/errors.hpp"

namespace kps {

/// Exact rational scalar.  GMP's canonical form (coprime, positive
/// denominator) is maintained by mpq_class itself.
using Rational = mpq_class;
using Integer = mpz_class;

inline bool is_zero(const Rational& r) { return sgn(r) == 0; }

inline Rational rat_of(long n, long d = 1) {
    if (d == 0) throw pole_error("rational with zero denominator");
    Rational r(n, d);
    r.canonicalize();
    return r;
}

inline Rational rat_pow(const Rational& b, long e) {
    if (e < 0) {
        if (is_zero(b)) throw pole_error("0 raised to a negative power");
        return 1 / rat_pow(b, -e);
    }
    Rational acc(1), base(b);
    for (long k = e; k > 0; k >>= 1) {
        if (k & 1) acc *= base;
        base *= base;
    }
    return acc;
}

/// gcd on rationals: the positive generator of the fractional ideal
/// a*Z + b*Z.  Used for content extraction.
inline Rational rat_gcd(const Rational& a, const Rational& b) {
    if (is_zero(a)) return abs(b);
    if (is_zero(b)) return abs(a);
    Integer n, d;
    mpz_gcd(n.get_mpz_t(), a.get_num().get_mpz_t(), b.get_num().get_mpz_t());
    mpz_lcm(d.get_mpz_t(), a.get_den().get_mpz_t(), b.get_den().get_mpz_t());
    Rational r(n, d);
    r.canonicalize();
    return r;
}

inline std::string rat_str(const Rational& r) { return r.get_str(); }

} // namespace kps
