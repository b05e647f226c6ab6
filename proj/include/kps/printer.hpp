#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "kps/rational_expr.hpp"

namespace kps {

struct PrintOptions {
    bool full_parens = false; ///< fully parenthesized output (round-trip safe under any precedence)
};

namespace detail {

/// Factors print parameters first, then coordinates, each in declaration
/// order (so a term reads like a scalar coefficient times a monomial).
inline std::string mono_str(const Mono& m, const SymbolEnv& env) {
    auto rank = [&](std::size_t i) {
        switch (env.at(i).kind) {
        case symbol_kind::parameter: return 0;
        case symbol_kind::coordinate: return 1;
        case symbol_kind::free_function: return 2;
        default: return 3;
        }
    };
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i] != 0) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return rank(a) < rank(b); });
    std::string s;
    for (std::size_t i : idx) {
        if (!s.empty()) s += "*";
        s += env.at(i).display;
        if (m[i] > 1) s += "^" + std::to_string(m[i]);
    }
    return s;
}

} // namespace detail

/// Terms in descending grevlex order; coefficients as exact rationals.
inline std::string print_poly(const QPoly& p, const SymbolEnv& env, const PrintOptions& opt = {}) {
    if (p.is_zero_poly()) return "0";
    std::vector<std::pair<Mono, Rational>> terms(p.terms().begin(), p.terms().end());
    Order ord = Order::grevlex();
    std::sort(terms.begin(), terms.end(),
              [&](const auto& a, const auto& b) { return ord.cmp(a.first, b.first) > 0; });
    std::string out;
    bool first = true;
    for (auto& [m, c] : terms) {
        bool neg = sgn(c) < 0;
        Rational mag = abs(c);
        std::string mono = detail::mono_str(m, env);
        std::string body;
        if (mono.empty()) body = rat_str(mag);
        else if (mag == 1) body = mono;
        else body = rat_str(mag) + "*" + mono;
        if (opt.full_parens) body = "(" + body + ")";
        if (first) {
            out += (neg ? "-" : "") + body;
            first = false;
        } else {
            out += (neg ? " - " : " + ") + body;
        }
    }
    return out;
}

/// Canonical single-fraction display: "num" or "num/den", parenthesized only
/// as required for exact re-parse (or fully, per options).
inline std::string print_expr(const RatExpr& e, const PrintOptions& opt = {}) {
    if (!e.env()) return e.is_zero_expr() ? "0" : rat_str(e.constant_value());
    const SymbolEnv& env = *e.env();
    std::string num = print_poly(e.num(), env, opt);
    if (e.is_polynomial()) return num;
    std::string den = print_poly(e.den(), env, opt);
    bool num_parens = opt.full_parens || e.num().term_count() > 1;
    bool den_parens = true;
    if (!opt.full_parens && e.den().term_count() == 1) {
        auto& [m, c] = *e.den().terms().begin();
        long nvars = 0;
        for (unsigned x : m) nvars += x > 0 ? 1 : 0;
        // bare "c" or "x^k" binds correctly after '/'; anything with '*' must be wrapped
        if ((nvars == 0 && sgn(c) > 0) || (nvars == 1 && c == Rational(1))) den_parens = false;
    }
    if (num_parens) num = "(" + num + ")";
    if (den_parens) den = "(" + den + ")";
    return num + "/" + den;
}

} // namespace kps
