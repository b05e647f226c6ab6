#pragma once

#include <map>
#include <utility>
#include <vector>

#include "kps/errors.hpp"
#include "kps/monomial.hpp"
#include "kps/rational.hpp"

namespace kps {

/// Sparse multivariate polynomial over a coefficient field C.  Terms are kept
/// in a canonical structural order independent of any monomial order; leading
/// terms under a given Order are found by scan.  C must supply +, -, *, /,
/// unary -, ==, construction from long, and a free is_zero(C).
template <class C>
class MPoly {
public:
    using term_map = std::map<Mono, C, MonoLess>;

    MPoly() = default;

    static MPoly zero() { return MPoly{}; }

    static MPoly constant(C c) {
        MPoly p;
        if (!is_zero(c)) p.t_.emplace(Mono{}, std::move(c));
        return p;
    }

    static MPoly variable(std::size_t i, unsigned e = 1) {
        MPoly p;
        if (e == 0) return constant(C(1));
        Mono m(i + 1, 0u);
        m[i] = e;
        p.t_.emplace(std::move(m), C(1));
        return p;
    }

    static MPoly term(Mono m, C c) {
        MPoly p;
        if (!is_zero(c)) {
            mono_trim(m);
            p.t_.emplace(std::move(m), std::move(c));
        }
        return p;
    }

    bool is_zero_poly() const { return t_.empty(); }

    bool is_constant() const {
        return t_.empty() || (t_.size() == 1 && t_.begin()->first.empty());
    }

    C constant_value() const {
        if (t_.empty()) return C(0);
        if (!is_constant()) throw error("polynomial is not constant");
        return t_.begin()->second;
    }

    std::size_t term_count() const { return t_.size(); }
    const term_map& terms() const { return t_; }

    /// Highest variable position used, plus one.
    std::size_t var_span() const {
        std::size_t n = 0;
        for (auto& [m, c] : t_) n = std::max(n, m.size());
        return n;
    }

    bool uses_var(std::size_t i) const {
        for (auto& [m, c] : t_)
            if (mono_get(m, i) > 0) return true;
        return false;
    }

    long total_degree() const { // -1 for the zero polynomial
        long d = -1;
        for (auto& [m, c] : t_) d = std::max(d, mono_deg(m));
        return d;
    }

    long degree_in(std::size_t i) const {
        long d = -1;
        for (auto& [m, c] : t_) d = std::max(d, long(mono_get(m, i)));
        return d;
    }

    void add_term(Mono m, const C& c) {
        if (is_zero(c)) return;
        mono_trim(m);
        auto [it, fresh] = t_.emplace(std::move(m), c);
        if (!fresh) {
            it->second = it->second + c;
            if (is_zero(it->second)) t_.erase(it);
        }
    }

    MPoly operator-() const {
        MPoly r;
        for (auto& [m, c] : t_) r.t_.emplace(m, -c);
        return r;
    }

    MPoly operator+(const MPoly& o) const {
        MPoly r = *this;
        for (auto& [m, c] : o.t_) r.add_term(m, c);
        return r;
    }

    MPoly operator-(const MPoly& o) const {
        MPoly r = *this;
        for (auto& [m, c] : o.t_) r.add_term(m, -c);
        return r;
    }

    MPoly operator*(const MPoly& o) const {
        MPoly r;
        for (auto& [ma, ca] : t_)
            for (auto& [mb, cb] : o.t_) r.add_term(mono_mul(ma, mb), ca * cb);
        return r;
    }

    MPoly scaled(const C& c) const {
        MPoly r;
        if (is_zero(c)) return r;
        for (auto& [m, k] : t_) {
            C v = k * c;
            if (!is_zero(v)) r.t_.emplace(m, std::move(v));
        }
        return r;
    }

    MPoly mul_term(const Mono& m, const C& c) const {
        MPoly r;
        if (is_zero(c)) return r;
        for (auto& [mm, k] : t_) {
            C v = k * c;
            if (!is_zero(v)) r.t_.emplace(mono_mul(mm, m), std::move(v));
        }
        return r;
    }

    MPoly pow(unsigned e) const {
        MPoly acc = constant(C(1)), base = *this;
        for (unsigned k = e; k > 0; k >>= 1) {
            if (k & 1) acc = acc * base;
            base = base * base;
        }
        return acc;
    }

    /// Formal partial derivative with respect to variable position i.
    MPoly derivative(std::size_t i) const {
        MPoly r;
        for (auto& [m, c] : t_) {
            unsigned e = mono_get(m, i);
            if (e == 0) continue;
            Mono mm = m;
            mm[i] -= 1;
            mono_trim(mm);
            r.add_term(std::move(mm), c * long(e));
        }
        return r;
    }

    bool operator==(const MPoly& o) const { return t_ == o.t_; }
    bool operator!=(const MPoly& o) const { return !(t_ == o.t_); }

    /// Leading term under the given order (error on the zero polynomial).
    std::pair<const Mono*, const C*> leading(const Order& ord) const {
        if (t_.empty()) throw error("leading term of zero polynomial");
        auto best = t_.begin();
        for (auto it = std::next(t_.begin()); it != t_.end(); ++it)
            if (ord.cmp(it->first, best->first) > 0) best = it;
        return {&best->first, &best->second};
    }

private:
    term_map t_;
};

template <class C>
inline bool is_zero(const MPoly<C>& p) {
    return p.is_zero_poly();
}

/// Polynomial with exact rational coefficients; exponent positions refer to
/// a SymbolEnv's symbol list.
using QPoly = MPoly<Rational>;

} // namespace kps
