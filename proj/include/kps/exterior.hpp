#pragma once

#include "kps/chart.hpp"

namespace kps {

/// Exterior differential of a scalar function: (df)_i = df/dx_i.
inline OneForm d(ChartPtr chart, const RatExpr& f) {
    OneForm t = OneForm::zero(chart);
    for (std::size_t i = 0; i < chart->dim(); ++i) t.comp[i] = chart->deriv(f, i);
    return t;
}

/// Exterior differential of a one-form: (d theta)_{ij} = d_i theta_j - d_j theta_i.
inline TwoForm d(const OneForm& theta) {
    const ChartPtr& c = theta.chart;
    TwoForm w(c);
    for (std::size_t i = 0; i < c->dim(); ++i)
        for (std::size_t j = i + 1; j < c->dim(); ++j) {
            RatExpr v = c->deriv(theta.comp[j], i) - c->deriv(theta.comp[i], j);
            if (!v.is_zero_expr()) w.set(i, j, v);
        }
    return w;
}

/// Natural pairing <theta, X>.
inline RatExpr pair(const OneForm& theta, const VectorField& X) {
    RatExpr s(theta.chart->env(), Rational(0));
    for (std::size_t i = 0; i < theta.comp.size(); ++i) s = s + theta.comp[i] * X.comp[i];
    return s;
}

/// Interior product i(X)omega, a one-form: (i_X w)_j = sum_i X^i w_{ij}.
inline OneForm interior(const VectorField& X, const TwoForm& w) {
    const ChartPtr& c = X.chart;
    OneForm t = OneForm::zero(c);
    for (auto& [ij, v] : w.entries()) {
        auto [i, j] = ij;
        t.comp[j] = t.comp[j] + X.comp[i] * v;
        t.comp[i] = t.comp[i] - X.comp[j] * v;
    }
    return t;
}

/// Directional derivative X(f) = sum_i X^i df/dx_i.
inline RatExpr apply(const VectorField& X, const RatExpr& f) {
    RatExpr s(X.chart->env(), Rational(0));
    for (std::size_t i = 0; i < X.comp.size(); ++i)
        s = s + X.comp[i] * X.chart->deriv(f, i);
    return s;
}

/// Lie bracket [X, Y]^i = X(Y^i) - Y(X^i).
inline VectorField bracket(const VectorField& X, const VectorField& Y) {
    VectorField r = VectorField::zero(X.chart);
    for (std::size_t i = 0; i < r.comp.size(); ++i)
        r.comp[i] = apply(X, Y.comp[i]) - apply(Y, X.comp[i]);
    return r;
}

/// d of a two-form vanishes iff for all i<j<l:
/// d_i w_{jl} - d_j w_{il} + d_l w_{ij} = 0.
inline bool is_closed(const TwoForm& w) {
    const ChartPtr& c = w.chart();
    std::size_t n = c->dim();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t l = j + 1; l < n; ++l) {
                RatExpr v = c->deriv(w.get(j, l), i) - c->deriv(w.get(i, l), j) +
                            c->deriv(w.get(i, j), l);
                if (!v.is_zero_expr()) return false;
            }
    return true;
}

/// Pullback of a one-form: (phi* theta)_a = sum_i (theta_i o phi) d phi^i / dx_a.
inline OneForm pullback(const SmoothMap& phi, const OneForm& theta) {
    OneForm t = OneForm::zero(phi.src);
    for (std::size_t i = 0; i < phi.dst->dim(); ++i) {
        RatExpr ti = phi.pull(theta.comp[i]);
        if (ti.is_zero_expr()) continue;
        for (std::size_t a = 0; a < phi.src->dim(); ++a)
            t.comp[a] = t.comp[a] + ti * phi.src->deriv(phi.comp[i], a);
    }
    return t;
}

/// Pullback of a two-form:
/// (phi* w)_{ab} = sum_{i<j} (w_{ij} o phi) (d_a phi^i d_b phi^j - d_b phi^i d_a phi^j).
inline TwoForm pullback(const SmoothMap& phi, const TwoForm& w) {
    TwoForm r(phi.src);
    for (auto& [ij, v] : w.entries()) {
        auto [i, j] = ij;
        RatExpr vij = phi.pull(v);
        if (vij.is_zero_expr()) continue;
        for (std::size_t a = 0; a < phi.src->dim(); ++a)
            for (std::size_t b = a + 1; b < phi.src->dim(); ++b) {
                RatExpr coef = phi.src->deriv(phi.comp[i], a) * phi.src->deriv(phi.comp[j], b) -
                               phi.src->deriv(phi.comp[i], b) * phi.src->deriv(phi.comp[j], a);
                if (!coef.is_zero_expr()) r.add(a, b, vij * coef);
            }
    }
    return r;
}

} // namespace kps
