#pragma once

#include <map>
#include <optional>
#include <vector>

#include "kps/polynomial.hpp"

namespace kps {

/// Rational content: positive gcd of all coefficients (0 for the zero poly).
inline Rational qp_content(const QPoly& p) {
    Rational c(0);
    for (auto& [m, k] : p.terms()) c = rat_gcd(c, k);
    return c;
}

/// Scale so coefficients are coprime integers and the leading coefficient
/// under `ord` is positive.  Identity on the zero polynomial.
inline QPoly qp_int_normalize(const QPoly& p, const Order& ord = Order::grevlex()) {
    if (p.is_zero_poly()) return p;
    Rational c = qp_content(p);
    if (sgn(*p.leading(ord).second) < 0) c = -c;
    return p.scaled(1 / c);
}

/// Exact division a / b under greedy leading-term elimination (grevlex);
/// nullopt when b does not divide a.
inline std::optional<QPoly> qp_divide_exact(const QPoly& a, const QPoly& b) {
    if (b.is_zero_poly()) return std::nullopt;
    static const Order ord = Order::grevlex();
    auto [lmb, lcb] = b.leading(ord);
    QPoly q, r = a;
    while (!r.is_zero_poly()) {
        auto [lmr, lcr] = r.leading(ord);
        if (!mono_divides(*lmb, *lmr)) return std::nullopt;
        Mono m = mono_div(*lmr, *lmb);
        Rational c = *lcr / *lcb;
        q.add_term(m, c);
        r = r - b.mul_term(m, c);
    }
    return q;
}

namespace detail {

/// View of p as a univariate polynomial in variable position x with
/// polynomial coefficients (which never mention x).
inline std::map<unsigned, QPoly> univariate_view(const QPoly& p, std::size_t x) {
    std::map<unsigned, QPoly> v;
    for (auto& [m, c] : p.terms()) {
        unsigned e = mono_get(m, x);
        Mono rest = m;
        if (x < rest.size()) rest[x] = 0;
        mono_trim(rest);
        v[e].add_term(rest, c);
    }
    return v;
}

inline QPoly from_univariate(const std::map<unsigned, QPoly>& v, std::size_t x) {
    QPoly p;
    for (auto& [e, c] : v) {
        QPoly xe = QPoly::variable(x, e);
        p = p + c * xe;
    }
    return p;
}

} // namespace detail

QPoly qp_gcd(const QPoly& a, const QPoly& b);

namespace detail {

/// gcd of the univariate-in-x coefficient polynomials.
inline QPoly content_in(const QPoly& p, std::size_t x) {
    QPoly c;
    for (auto& [e, coeff] : univariate_view(p, x)) c = qp_gcd(c, coeff);
    return c;
}

inline QPoly primitive_in(const QPoly& p, std::size_t x, const QPoly& content) {
    auto q = qp_divide_exact(p, content);
    if (!q) throw error("content division failed (internal)");
    return *q;
}

/// Pseudo-remainder of a by b with respect to variable x (deg_x a >= deg_x b).
inline QPoly pseudo_rem(QPoly a, const QPoly& b, std::size_t x) {
    long db = b.degree_in(x);
    auto bv = univariate_view(b, x);
    const QPoly& lcb = bv.rbegin()->second;
    while (!a.is_zero_poly()) {
        long da = a.degree_in(x);
        if (da < db) break;
        auto av = univariate_view(a, x);
        const QPoly& lca = av.rbegin()->second;
        QPoly shift = QPoly::variable(x, unsigned(da - db));
        a = a * lcb - b * shift * lca;
    }
    return a;
}

} // namespace detail

/// Multivariate gcd over Q via primitive pseudo-remainder sequences.  The
/// result is integer-normalized with positive leading coefficient; the gcd of
/// anything with a nonzero constant is 1 (constants are units over Q).
inline QPoly qp_gcd(const QPoly& a, const QPoly& b) {
    if (a.is_zero_poly()) return qp_int_normalize(b);
    if (b.is_zero_poly()) return qp_int_normalize(a);
    if (a.is_constant() || b.is_constant()) return QPoly::constant(Rational(1));

    std::size_t x = std::max(a.var_span(), b.var_span()) - 1;
    QPoly ca = detail::content_in(a, x), cb = detail::content_in(b, x);
    QPoly r0 = detail::primitive_in(a, x, ca);
    QPoly r1 = detail::primitive_in(b, x, cb);
    if (r0.is_constant() || r1.is_constant()) {
        r0 = QPoly::constant(Rational(1));
        r1 = QPoly::zero();
    }
    if (r0.degree_in(x) < r1.degree_in(x)) std::swap(r0, r1);
    while (!r1.is_zero_poly()) {
        QPoly r = detail::pseudo_rem(r0, r1, x);
        r0 = std::move(r1);
        if (r.is_zero_poly()) {
            r1 = QPoly::zero();
        } else if (r.degree_in(x) <= 0) {
            // a nonzero remainder of x-degree 0 means the primitive parts are coprime in x
            r1 = QPoly::zero();
            r0 = QPoly::constant(Rational(1));
        } else {
            r1 = detail::primitive_in(r, x, detail::content_in(r, x));
        }
    }
    QPoly g = qp_gcd(ca, cb) * qp_int_normalize(r0);
    return qp_int_normalize(g);
}

/// Square-free part: p / gcd(p, dp/dx_1, ..., dp/dx_n), integer-normalized.
inline QPoly qp_squarefree_part(const QPoly& p) {
    if (p.is_zero_poly() || p.is_constant()) return qp_int_normalize(p);
    QPoly g = qp_int_normalize(p);
    for (std::size_t i = 0, n = p.var_span(); i < n; ++i) {
        QPoly d = p.derivative(i);
        if (!d.is_zero_poly()) g = qp_gcd(g, d);
    }
    auto q = qp_divide_exact(p, g);
    if (!q) throw error("squarefree division failed (internal)");
    return qp_int_normalize(*q);
}

/// Content of p with respect to the non-selected positions: write p with
/// monomials in the selected ("main") positions and polynomial coefficients in
/// the rest; return the gcd of those coefficients.  Used to strip factors that
/// are units of the coefficient field (pure-parameter factors).
inline QPoly qp_content_outside(const QPoly& p, const std::vector<char>& main_mask) {
    std::map<Mono, QPoly, MonoLess> groups;
    for (auto& [m, c] : p.terms()) {
        Mono main(m.size(), 0u), rest(m.size(), 0u);
        for (std::size_t i = 0; i < m.size(); ++i)
            (i < main_mask.size() && main_mask[i] ? main[i] : rest[i]) = m[i];
        mono_trim(main);
        mono_trim(rest);
        groups[main].add_term(rest, c);
    }
    QPoly g;
    for (auto& [m, coeff] : groups) g = qp_gcd(g, coeff);
    return g;
}

} // namespace kps
