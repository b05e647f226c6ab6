#pragma once

#include <map>
#include <utility>

#include "kps/polygcd.hpp"
#include "kps/polynomial.hpp"
#include "kps/symbols.hpp"

namespace kps {

/// Exact rational function of an environment's symbols, kept in canonical
/// form: numerator and denominator coprime, denominator nonzero and monic
/// under the global grevlex order.  Equality of canonical forms is structural
/// equality.  The environment pointer may be null for bare numeric constants;
/// such values adopt the other operand's environment on combination.
class RatExpr {
public:
    RatExpr() : den_(QPoly::constant(Rational(1))) {}

    RatExpr(long n) : num_(QPoly::constant(Rational(n))), den_(QPoly::constant(Rational(1))) {}

    explicit RatExpr(Rational r)
        : num_(QPoly::constant(std::move(r))), den_(QPoly::constant(Rational(1))) {}

    RatExpr(EnvPtr env, Rational r)
        : env_(std::move(env)), num_(QPoly::constant(std::move(r))),
          den_(QPoly::constant(Rational(1))) {}

    static RatExpr from_poly(EnvPtr env, QPoly p) {
        RatExpr r;
        r.env_ = std::move(env);
        r.num_ = std::move(p);
        return r;
    }

    static RatExpr from_fraction(EnvPtr env, QPoly num, QPoly den) {
        if (den.is_zero_poly()) throw pole_error("zero denominator");
        RatExpr r;
        r.env_ = std::move(env);
        r.num_ = std::move(num);
        r.den_ = std::move(den);
        r.canonicalize();
        return r;
    }

    static RatExpr variable(EnvPtr env, std::size_t index) {
        return from_poly(std::move(env), QPoly::variable(index));
    }

    const EnvPtr& env() const { return env_; }
    const QPoly& num() const { return num_; }
    const QPoly& den() const { return den_; }

    bool is_zero_expr() const { return num_.is_zero_poly(); }
    bool is_one() const { return den_is_one() && num_ == QPoly::constant(Rational(1)); }
    bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
    bool is_polynomial() const { return den_is_one(); }

    Rational constant_value() const {
        return num_.constant_value() / den_.constant_value();
    }

    bool uses(std::size_t i) const { return num_.uses_var(i) || den_.uses_var(i); }

    bool uses_kind(symbol_kind k) const {
        if (!env_) return false;
        std::size_t n = std::max(num_.var_span(), den_.var_span());
        for (std::size_t i = 0; i < n; ++i)
            if (env_->at(i).kind == k && uses(i)) return true;
        return false;
    }

    RatExpr operator-() const {
        RatExpr r = *this;
        r.num_ = -r.num_;
        return r;
    }

    RatExpr operator+(const RatExpr& o) const {
        RatExpr r;
        r.env_ = common_env(env_, o.env_);
        if (den_is_one() && o.den_is_one()) {
            r.num_ = num_ + o.num_;
            return r;
        }
        r.num_ = num_ * o.den_ + o.num_ * den_;
        r.den_ = den_ * o.den_;
        r.canonicalize();
        return r;
    }

    RatExpr operator-(const RatExpr& o) const { return *this + (-o); }

    RatExpr operator*(const RatExpr& o) const {
        RatExpr r;
        r.env_ = common_env(env_, o.env_);
        r.num_ = num_ * o.num_;
        if (den_is_one() && o.den_is_one()) return r;
        r.den_ = den_ * o.den_;
        r.canonicalize();
        return r;
    }

    RatExpr operator*(long n) const {
        RatExpr r = *this;
        r.num_ = r.num_.scaled(Rational(n));
        return r;
    }

    RatExpr operator/(const RatExpr& o) const {
        if (o.is_zero_expr()) throw pole_error("division by zero expression");
        RatExpr r;
        r.env_ = common_env(env_, o.env_);
        r.num_ = num_ * o.den_;
        r.den_ = den_ * o.num_;
        r.canonicalize();
        return r;
    }

    RatExpr pow(long e) const {
        if (e < 0) {
            if (is_zero_expr()) throw pole_error("0 raised to a negative power");
            return RatExpr(1) / pow(-e);
        }
        RatExpr acc(1), base = *this;
        acc.env_ = env_;
        for (long k = e; k > 0; k >>= 1) {
            if (k & 1) acc = acc * base;
            base = base * base;
        }
        return acc;
    }

    bool operator==(const RatExpr& o) const {
        common_env(env_, o.env_); // throws on unrelated environments
        return num_ == o.num_ && den_ == o.den_;
    }
    bool operator!=(const RatExpr& o) const { return !(*this == o); }

    /// Partial derivative with respect to environment symbol `i` (a coordinate
    /// or parameter).  Expressions containing opaque free-function symbols
    /// cannot be differentiated.
    RatExpr differentiate(std::size_t i) const {
        if (!env_) return RatExpr(env_, Rational(0));
        const auto kind = env_->at(i).kind;
        if (kind != symbol_kind::coordinate && kind != symbol_kind::parameter)
            throw symbol_error("cannot differentiate with respect to '" + env_->at(i).name +
                               "': not a coordinate or parameter");
        if (uses_kind(symbol_kind::free_function))
            throw opaque_derivative_error(
                "expression contains an opaque free-function symbol; substitute it first");
        if (uses_kind(symbol_kind::aux))
            throw symbol_error("auxiliary symbol appears in a differentiated expression");
        RatExpr r;
        r.env_ = env_;
        r.num_ = num_.derivative(i) * den_ - num_ * den_.derivative(i);
        r.den_ = den_ * den_;
        r.canonicalize();
        return r;
    }

    /// Simultaneous substitution.  Bound symbols (by environment index) are
    /// replaced by their expressions; unbound symbols are mapped by name into
    /// `target`.  A resulting identically-zero denominator is a pole.
    RatExpr substitute(const std::map<std::size_t, RatExpr>& bindings, const EnvPtr& target) const {
        RatExpr n = eval_poly(num_, bindings, target);
        RatExpr d = eval_poly(den_, bindings, target);
        if (d.is_zero_expr()) throw pole_error("substitution pole: denominator vanishes identically");
        return n / d;
    }

private:
    bool den_is_one() const {
        return den_.is_constant() && den_.constant_value() == Rational(1);
    }

    void canonicalize() {
        if (num_.is_zero_poly()) {
            den_ = QPoly::constant(Rational(1));
            return;
        }
        if (!den_is_one()) {
            QPoly g = qp_gcd(num_, den_);
            if (!g.is_constant()) {
                num_ = *qp_divide_exact(num_, g);
                den_ = *qp_divide_exact(den_, g);
            }
            Rational lc = *den_.leading(Order::grevlex()).second;
            if (lc != Rational(1)) {
                num_ = num_.scaled(1 / lc);
                den_ = den_.scaled(1 / lc);
            }
        }
    }

    RatExpr eval_poly(const QPoly& p, const std::map<std::size_t, RatExpr>& bindings,
                      const EnvPtr& target) const {
        RatExpr acc(target, Rational(0));
        for (auto& [m, c] : p.terms()) {
            RatExpr term(target, c);
            for (std::size_t i = 0; i < m.size(); ++i) {
                if (m[i] == 0) continue;
                RatExpr v;
                auto it = bindings.find(i);
                if (it != bindings.end()) {
                    v = it->second;
                } else {
                    if (!env_) throw symbol_error("constant expression has no symbols to map");
                    int j = target ? target->index_of(env_->at(i).name) : -1;
                    if (j < 0)
                        throw symbol_error("symbol '" + env_->at(i).name +
                                           "' is unbound and absent from the target environment");
                    v = RatExpr::variable(target, std::size_t(j));
                }
                term = term * v.pow(long(m[i]));
            }
            acc = acc + term;
        }
        return acc;
    }

    EnvPtr env_;
    QPoly num_, den_;
};

inline bool is_zero(const RatExpr& e) { return e.is_zero_expr(); }

inline RatExpr operator*(long n, const RatExpr& e) { return e * n; }

} // namespace kps
