#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "kps/ideal.hpp"
#include "kps/parser.hpp"

namespace kps {

/// A global coordinate chart: named coordinates, named parameters, and a list
/// of declared nonvanishing polynomials (the chart is the locus where they
/// are invertible).  Owns the symbol environment and the localized polynomial
/// ring used for all ideal-theoretic work on this chart.
class Chart {
public:
    /// `coords` in chart order (display aliases allowed); `nonvanishing` are
    /// expression strings over coordinates and parameters that must be
    /// denominator-free.
    static std::shared_ptr<const Chart> create(std::vector<symbol_info> coords,
                                               std::vector<std::string> params,
                                               std::vector<std::string> nonvanishing = {},
                                               ResourceLimits limits = {}) {
        auto c = std::shared_ptr<Chart>(new Chart);
        std::vector<symbol_info> syms;
        for (auto& s : coords) {
            symbol_info si = s;
            si.kind = symbol_kind::coordinate;
            syms.push_back(si);
        }
        for (auto& p : params) syms.emplace_back(p, symbol_kind::parameter);
        EnvPtr base_env = SymbolEnv::create(syms);

        std::vector<QPoly> bases;
        for (auto& text : nonvanishing) {
            RatExpr f = parse_expr(base_env, text);
            if (!f.is_polynomial())
                throw input_error("nonvanishing declaration must be polynomial: " + text);
            if (f.is_constant()) throw input_error("nonvanishing declaration is constant: " + text);
            bases.push_back(qp_int_normalize(f.num()));
        }
        std::vector<symbol_info> aux;
        for (std::size_t j = 0; j < bases.size(); ++j)
            aux.emplace_back("_loc" + std::to_string(j), symbol_kind::aux);
        c->env_ = base_env->extended(aux);

        std::vector<std::size_t> vars;
        for (std::size_t i = 0; i < coords.size(); ++i) vars.push_back(i);
        std::vector<Ring::LocalRel> locals;
        for (std::size_t j = 0; j < bases.size(); ++j) {
            locals.push_back(Ring::LocalRel{coords.size() + j, bases[j]});
            vars.push_back(syms.size() + j);
        }
        c->ncoords_ = coords.size();
        c->ring_ = Ring::create(c->env_, std::move(vars), Order::grevlex(), std::move(locals),
                                limits);
        return c;
    }

    const EnvPtr& env() const { return env_; }
    const RingPtr& ring() const { return ring_; }
    std::size_t dim() const { return ncoords_; }

    /// Environment index of the i-th chart coordinate.
    std::size_t coord_env(std::size_t i) const { return ring_->vars().at(i); }
    const std::string& coord_name(std::size_t i) const { return env_->at(coord_env(i)).name; }
    const std::string& coord_display(std::size_t i) const {
        return env_->at(coord_env(i)).display;
    }

    /// Chart-coordinate index of a name (or display alias); -1 if absent or
    /// not a coordinate of this chart.
    int coord_index(const std::string& name) const {
        int e = env_->index_of(name);
        if (e < 0) return -1;
        int pos = ring_->position_of_env(std::size_t(e));
        return (pos >= 0 && std::size_t(pos) < ncoords_) ? pos : -1;
    }

    RatExpr coordinate(std::size_t i) const { return RatExpr::variable(env_, coord_env(i)); }
    RatExpr parse(const std::string& text) const { return parse_expr(env_, text); }

    /// d/dx_i as an operator on scalar functions.
    RatExpr deriv(const RatExpr& f, std::size_t i) const {
        return f.differentiate(coord_env(i));
    }

    PolyIdeal zero_ideal() const { return PolyIdeal(ring_, {}); }

private:
    Chart() = default;
    EnvPtr env_;
    RingPtr ring_;
    std::size_t ncoords_ = 0;
};

using ChartPtr = std::shared_ptr<const Chart>;

/// Vector field on a chart: X = sum_i comp[i] d/dx_i.
struct VectorField {
    ChartPtr chart;
    std::vector<RatExpr> comp;

    static VectorField zero(ChartPtr c) {
        return VectorField{c, std::vector<RatExpr>(c->dim(), RatExpr(c->env(), Rational(0)))};
    }
    static VectorField basis(ChartPtr c, std::size_t i) {
        VectorField v = zero(c);
        v.comp[i] = RatExpr(c->env(), Rational(1));
        return v;
    }
};

inline VectorField operator+(const VectorField& a, const VectorField& b) {
    VectorField r = a;
    for (std::size_t i = 0; i < r.comp.size(); ++i) r.comp[i] = r.comp[i] + b.comp[i];
    return r;
}
inline VectorField operator*(const RatExpr& s, const VectorField& v) {
    VectorField r = v;
    for (auto& c : r.comp) c = s * c;
    return r;
}

/// One-form theta = sum_i comp[i] dx_i.
struct OneForm {
    ChartPtr chart;
    std::vector<RatExpr> comp;

    static OneForm zero(ChartPtr c) {
        return OneForm{c, std::vector<RatExpr>(c->dim(), RatExpr(c->env(), Rational(0)))};
    }
};

inline OneForm operator+(const OneForm& a, const OneForm& b) {
    OneForm r = a;
    for (std::size_t i = 0; i < r.comp.size(); ++i) r.comp[i] = r.comp[i] + b.comp[i];
    return r;
}
inline OneForm operator-(const OneForm& a, const OneForm& b) {
    OneForm r = a;
    for (std::size_t i = 0; i < r.comp.size(); ++i) r.comp[i] = r.comp[i] - b.comp[i];
    return r;
}
inline OneForm operator*(const RatExpr& s, const OneForm& t) {
    OneForm r = t;
    for (auto& c : r.comp) c = s * c;
    return r;
}

/// Two-form omega = sum_{i<j} c_{ij} dx_i ^ dx_j, stored upper-triangular.
class TwoForm {
public:
    explicit TwoForm(ChartPtr c) : chart_(std::move(c)) {}

    const ChartPtr& chart() const { return chart_; }

    /// Coefficient of dx_i ^ dx_j with full antisymmetry (get(j,i) = -get(i,j)).
    RatExpr get(std::size_t i, std::size_t j) const {
        if (i == j) return RatExpr(chart_->env(), Rational(0));
        bool flip = i > j;
        if (flip) std::swap(i, j);
        auto it = c_.find({i, j});
        RatExpr v = it == c_.end() ? RatExpr(chart_->env(), Rational(0)) : it->second;
        return flip ? -v : v;
    }

    /// Add v * dx_i ^ dx_j (i != j; antisymmetry handled).
    void add(std::size_t i, std::size_t j, const RatExpr& v) {
        if (i == j) throw input_error("two-form term dx_i ^ dx_i is zero");
        RatExpr w = v;
        if (i > j) {
            std::swap(i, j);
            w = -w;
        }
        auto [it, fresh] = c_.emplace(std::make_pair(i, j), w);
        if (!fresh) it->second = it->second + w;
    }

    void set(std::size_t i, std::size_t j, const RatExpr& v) {
        if (i == j) throw input_error("two-form term dx_i ^ dx_i is zero");
        RatExpr w = v;
        if (i > j) {
            std::swap(i, j);
            w = -w;
        }
        c_[{i, j}] = w;
    }

    const std::map<std::pair<std::size_t, std::size_t>, RatExpr>& entries() const { return c_; }

private:
    ChartPtr chart_;
    std::map<std::pair<std::size_t, std::size_t>, RatExpr> c_;
};

/// k-vector field: an ordered k-tuple of vector fields on one chart.
struct KVectorField {
    std::vector<VectorField> X;

    std::size_t k() const { return X.size(); }
};

/// Map between charts, given by target-coordinate expressions over the source
/// chart.  Parameters are shared by name.
struct SmoothMap {
    ChartPtr src;
    ChartPtr dst;
    std::vector<RatExpr> comp; ///< size dst->dim(), expressions on src

    /// Pull a scalar function on dst back to src: f o phi.
    RatExpr pull(const RatExpr& f) const {
        std::map<std::size_t, RatExpr> binding;
        for (std::size_t j = 0; j < dst->dim(); ++j) binding[dst->coord_env(j)] = comp[j];
        return f.substitute(binding, src->env());
    }
};

} // namespace kps
