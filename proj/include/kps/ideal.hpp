#pragma once

#include <algorithm>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <vector>

#include "kps/printer.hpp"
#include "kps/rational_expr.hpp"

namespace kps {

/// Polynomial over a Ring's main variables with coefficients in the rational
/// function field of the parameters.  Monomial positions are ring positions,
/// not environment indices.
using KPoly = MPoly<RatExpr>;

struct ResourceLimits {
    long max_total_degree = 24;
    long max_pairs = 50000;
};

/// Localized polynomial ring Q(parameters)[x_1..x_n, g_1^-1..g_m^-1]: main
/// variables are chart coordinates plus one inverse symbol per declared
/// nonvanishing polynomial; the relations g_j * g_j^-1 - 1 accompany every
/// Groebner computation so declared factors are genuine units.
class Ring : public std::enable_shared_from_this<Ring> {
public:
    struct LocalRel {
        std::size_t inv_pos;  ///< ring position of the inverse symbol
        QPoly base;           ///< the nonvanishing polynomial (environment positions)
    };

    static std::shared_ptr<const Ring> create(EnvPtr env, std::vector<std::size_t> vars,
                                              Order order = Order::grevlex(),
                                              std::vector<LocalRel> locals = {},
                                              ResourceLimits limits = {}) {
        auto r = std::shared_ptr<Ring>(new Ring);
        r->env_ = std::move(env);
        r->vars_ = std::move(vars);
        r->order_ = std::move(order);
        r->locals_ = std::move(locals);
        r->limits_ = limits;
        r->env_to_pos_.assign(r->env_->size(), -1);
        for (std::size_t p = 0; p < r->vars_.size(); ++p) {
            std::size_t ei = r->vars_[p];
            if (ei >= r->env_->size()) throw symbol_error("ring variable outside environment");
            r->env_to_pos_[ei] = int(p);
        }
        return r;
    }

    const EnvPtr& env() const { return env_; }
    const std::vector<std::size_t>& vars() const { return vars_; }
    const Order& order() const { return order_; }
    const std::vector<LocalRel>& locals() const { return locals_; }
    const ResourceLimits& limits() const { return limits_; }

    int position_of_env(std::size_t env_index) const {
        return env_index < env_to_pos_.size() ? env_to_pos_[env_index] : -1;
    }

    bool is_inverse_pos(std::size_t pos) const {
        for (auto& l : locals_)
            if (l.inv_pos == pos) return true;
        return false;
    }

    /// Same variables and localizations under a different monomial order.
    std::shared_ptr<const Ring> with_order(Order o) const {
        return create(env_, vars_, std::move(o), locals_, limits_);
    }

    /// Ring with one fresh auxiliary variable appended (for radical tests).
    std::shared_ptr<const Ring> with_aux_var(const std::string& name, EnvPtr& env_out) const {
        EnvPtr env2 = env_->extended({symbol_info(name, symbol_kind::aux)});
        std::vector<std::size_t> vars2 = vars_;
        vars2.push_back(env2->size() - 1);
        env_out = env2;
        return create(env2, vars2, Order::grevlex(), locals_, limits_);
    }

    /// Convert a denominator-free polynomial over environment positions.
    /// Coordinate-kind symbols must be ring variables; parameters go to the
    /// coefficient field; anything else is rejected.
    KPoly poly_from(const QPoly& p) const {
        KPoly out;
        for (auto& [m, c] : p.terms()) {
            Mono main;
            QPoly coeff_mono = QPoly::constant(Rational(1));
            for (std::size_t i = 0; i < m.size(); ++i) {
                if (m[i] == 0) continue;
                int pos = position_of_env(i);
                if (pos >= 0) {
                    if (main.size() <= std::size_t(pos)) main.resize(pos + 1, 0u);
                    main[std::size_t(pos)] = m[i];
                } else if (env_->at(i).kind == symbol_kind::parameter) {
                    coeff_mono = coeff_mono * QPoly::variable(i, m[i]);
                } else {
                    throw symbol_error("symbol '" + env_->at(i).name +
                                       "' is neither a ring variable nor a parameter");
                }
            }
            out.add_term(std::move(main), RatExpr::from_poly(env_, coeff_mono.scaled(c)));
        }
        return out;
    }

    struct Localized {
        KPoly poly;         ///< numerator times declared inverse symbols
        QPoly leftover_den; ///< denominator part not covered by declared nonvanishing factors
    };

    /// Express num/den with declared factors of den turned into inverse
    /// variables.  The leftover denominator (constant when fully covered) is
    /// returned for the caller's warning policy.
    Localized localize(const RatExpr& f) const {
        QPoly den = f.den();
        KPoly inv_part = KPoly::constant(RatExpr(1));
        for (auto& l : locals_) {
            for (;;) {
                auto q = qp_divide_exact(den, l.base);
                if (!q) break;
                den = *q;
                inv_part = inv_part * KPoly::variable(l.inv_pos);
            }
        }
        Rational c = den.is_constant() ? den.constant_value() : Rational(1);
        if (den.is_constant()) den = QPoly::constant(Rational(1));
        KPoly num = poly_from(f.num().scaled(1 / c));
        return Localized{num * inv_part, den};
    }

    /// Back to an expression: inverse symbols become 1/base.
    RatExpr to_expr(const KPoly& p) const {
        RatExpr acc(env_, Rational(0));
        for (auto& [m, c] : p.terms()) {
            RatExpr t = c;
            if (!t.env()) t = RatExpr(env_, Rational(0)) + t;
            for (std::size_t pos = 0; pos < m.size(); ++pos) {
                if (m[pos] == 0) continue;
                RatExpr v = var_expr(pos);
                t = t * v.pow(long(m[pos]));
            }
            acc = acc + t;
        }
        return acc;
    }

    RatExpr var_expr(std::size_t pos) const {
        for (auto& l : locals_)
            if (l.inv_pos == pos)
                return RatExpr(1) / RatExpr::from_poly(env_, l.base);
        return RatExpr::variable(env_, vars_.at(pos));
    }

    std::string kpoly_str(const KPoly& p) const { return print_expr(to_expr(p)); }

    /// d/dx applied to a ring polynomial, x a coordinate-kind environment
    /// symbol; inverse symbols differentiate by the chain rule d(1/g) = -g^-2 dg.
    KPoly kderiv(const KPoly& p, std::size_t env_coord) const {
        KPoly out;
        int pos = position_of_env(env_coord);
        if (pos >= 0) out = p.derivative(std::size_t(pos));
        for (auto& l : locals_) {
            QPoly dbase = l.base.derivative(env_coord);
            if (dbase.is_zero_poly()) continue;
            KPoly factor = -(KPoly::variable(l.inv_pos, 2) * poly_from(dbase));
            out = out + p.derivative(l.inv_pos) * factor;
        }
        return out;
    }

    /// The relation polynomials g * g^-1 - 1 adjoined to every basis.
    std::vector<KPoly> local_relations() const {
        std::vector<KPoly> rel;
        for (auto& l : locals_)
            rel.push_back(poly_from(l.base) * KPoly::variable(l.inv_pos) -
                          KPoly::constant(RatExpr(1)));
        return rel;
    }

    /// Normalize a constraint function to its polynomial representative:
    /// denominators dropped (declared factors are units; undeclared ones are
    /// recorded), content and pure-parameter factors removed, declared
    /// nonvanishing factors divided out, square-free part taken, sign fixed.
    /// Returns nullopt for an identically zero input; a nonzero constant
    /// output signals an inconsistent (empty) locus.
    std::optional<QPoly> normalize_constraint(const RatExpr& xi,
                                              std::vector<std::string>* warnings) const {
        if (xi.is_zero_expr()) return std::nullopt;
        QPoly den = xi.den();
        for (auto& l : locals_)
            for (;;) {
                auto q = qp_divide_exact(den, l.base);
                if (!q) break;
                den = *q;
            }
        if (!den.is_constant() && warnings)
            warnings->push_back("constraint denominator factor not covered by nonvanishing assumptions: " +
                                print_poly(qp_int_normalize(den), *env_));
        QPoly n = xi.num();
        for (auto& l : locals_)
            for (;;) {
                auto q = qp_divide_exact(n, l.base);
                if (!q || q->is_zero_poly()) break;
                n = *q;
            }
        std::vector<char> main_mask(env_->size(), 0);
        for (std::size_t v : vars_) main_mask[v] = 1;
        QPoly pc = qp_content_outside(n, main_mask);
        if (!pc.is_constant()) {
            auto q = qp_divide_exact(n, pc);
            if (q) n = *q;
        }
        n = qp_squarefree_part(n);
        return qp_int_normalize(n);
    }

private:
    Ring() = default;

    EnvPtr env_;
    std::vector<std::size_t> vars_;
    std::vector<int> env_to_pos_;
    Order order_;
    std::vector<LocalRel> locals_;
    ResourceLimits limits_;
};

using RingPtr = std::shared_ptr<const Ring>;

// ------------------------------------------------------------------ division

/// Full normal form of f against the set G under ord: no term of the result
/// is divisible by any leading monomial of G.
inline KPoly normal_form(KPoly f, const std::vector<KPoly>& G, const Order& ord) {
    if (G.empty()) return f;
    std::vector<std::pair<const Mono*, const RatExpr*>> lts;
    lts.reserve(G.size());
    for (auto& g : G) lts.push_back(g.leading(ord));
    for (;;) {
        const Mono* best = nullptr;
        const RatExpr* bestc = nullptr;
        std::size_t which = 0;
        for (auto& [m, c] : f.terms()) {
            for (std::size_t i = 0; i < G.size(); ++i) {
                if (!mono_divides(*lts[i].first, m)) continue;
                if (!best || ord.cmp(m, *best) > 0) {
                    best = &m;
                    bestc = &c;
                    which = i;
                }
                break;
            }
        }
        if (!best) return f;
        Mono q = mono_div(*best, *lts[which].first);
        RatExpr coef = *bestc / *lts[which].second;
        f = f - G[which].mul_term(q, coef);
    }
}

// ---------------------------------------------------------------- Buchberger

/// Reduced Groebner basis (monic, minimal, fully inter-reduced); unique for a
/// given ideal and order, hence deterministic regardless of pair strategy.
inline std::vector<KPoly> buchberger(const RingPtr& ring, std::vector<KPoly> gens,
                                     const Order& ord) {
    const auto& lim = ring->limits();
    auto check_degree = [&](const KPoly& p) {
        if (p.total_degree() > lim.max_total_degree)
            throw resource_error("ideal too hard: polynomial degree exceeds " +
                                 std::to_string(lim.max_total_degree));
    };

    std::vector<KPoly> G;
    for (auto& g : gens) {
        if (g.is_zero_poly()) continue;
        check_degree(g);
        auto [m, c] = g.leading(ord);
        G.push_back(g.scaled(RatExpr(1) / *c));
    }
    if (G.empty()) return {};

    struct Pair {
        std::size_t i, j;
        Mono lcm;
        long deg;
    };
    auto make_pair = [&](std::size_t i, std::size_t j) {
        Mono l = mono_lcm(*G[i].leading(ord).first, *G[j].leading(ord).first);
        return Pair{i, j, l, mono_deg(l)};
    };
    std::vector<Pair> queue;
    for (std::size_t i = 0; i < G.size(); ++i)
        for (std::size_t j = i + 1; j < G.size(); ++j) queue.push_back(make_pair(i, j));

    long processed = 0;
    while (!queue.empty()) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < queue.size(); ++k) {
            if (queue[k].deg < queue[best].deg ||
                (queue[k].deg == queue[best].deg &&
                 Order::grevlex().cmp(queue[k].lcm, queue[best].lcm) < 0))
                best = k;
        }
        Pair pr = queue[best];
        queue.erase(queue.begin() + long(best));
        if (++processed > lim.max_pairs)
            throw resource_error("ideal too hard: S-pair budget exceeded");

        const Mono& lmi = *G[pr.i].leading(ord).first;
        const Mono& lmj = *G[pr.j].leading(ord).first;
        if (mono_coprime(lmi, lmj)) continue; // Buchberger's first criterion
        KPoly s = G[pr.i].mul_term(mono_div(pr.lcm, lmi), RatExpr(1)) -
                  G[pr.j].mul_term(mono_div(pr.lcm, lmj), RatExpr(1));
        KPoly r = normal_form(std::move(s), G, ord);
        if (r.is_zero_poly()) continue;
        check_degree(r);
        r = r.scaled(RatExpr(1) / *r.leading(ord).second);
        G.push_back(std::move(r));
        for (std::size_t i = 0; i + 1 < G.size(); ++i) queue.push_back(make_pair(i, G.size() - 1));
    }

    // minimalize: drop any g whose leading monomial is divisible by another's
    std::vector<KPoly> minimal;
    for (std::size_t i = 0; i < G.size(); ++i) {
        const Mono& mi = *G[i].leading(ord).first;
        bool redundant = false;
        for (std::size_t j = 0; j < G.size() && !redundant; ++j) {
            if (i == j) continue;
            const Mono& mj = *G[j].leading(ord).first;
            if (mono_divides(mj, mi) && (mj != mi || j < i)) redundant = true;
        }
        if (!redundant) minimal.push_back(G[i]);
    }
    // inter-reduce tails
    for (;;) {
        bool changed = false;
        for (std::size_t i = 0; i < minimal.size(); ++i) {
            std::vector<KPoly> others;
            for (std::size_t j = 0; j < minimal.size(); ++j)
                if (j != i) others.push_back(minimal[j]);
            KPoly r = normal_form(minimal[i], others, ord);
            if (r != minimal[i]) {
                changed = true;
                if (r.is_zero_poly()) {
                    minimal.erase(minimal.begin() + long(i));
                    --i;
                } else {
                    minimal[i] = r.scaled(RatExpr(1) / *r.leading(ord).second);
                }
            }
        }
        if (!changed) break;
    }
    std::sort(minimal.begin(), minimal.end(), [&](const KPoly& a, const KPoly& b) {
        return ord.cmp(*a.leading(ord).first, *b.leading(ord).first) < 0;
    });
    return minimal;
}

// ------------------------------------------------------------------- ideals

/// Immutable polynomial ideal with a write-once cached reduced Groebner
/// basis.  All varieties are taken inside the localized chart (declared
/// nonvanishing polynomials are invertible).
class PolyIdeal {
public:
    PolyIdeal() = default;

    PolyIdeal(RingPtr ring, std::vector<KPoly> gens) : d_(std::make_shared<Data>()) {
        d_->ring = std::move(ring);
        for (auto& g : gens)
            if (!g.is_zero_poly()) d_->gens.push_back(std::move(g));
    }

    const RingPtr& ring() const { return d_->ring; }
    const std::vector<KPoly>& gens() const { return d_->gens; }

    /// Reduced Groebner basis of gens + localization relations.
    const std::vector<KPoly>& groebner() const {
        std::scoped_lock lk(d_->mu);
        if (!d_->gb) {
            std::vector<KPoly> in = d_->gens;
            for (auto& rel : d_->ring->local_relations()) in.push_back(rel);
            d_->gb = buchberger(d_->ring, std::move(in), d_->ring->order());
        }
        return *d_->gb;
    }

    bool is_unit_ideal() const {
        const auto& gb = groebner();
        return gb.size() == 1 && gb[0].is_constant();
    }

    KPoly reduce(const KPoly& f) const { return normal_form(f, groebner(), d_->ring->order()); }

    bool contains(const KPoly& f) const { return reduce(f).is_zero_poly(); }

    /// Rabinowitsch: f vanishes on the (localized) variety iff
    /// 1 lies in <gens, locals, 1 - y f>.
    bool in_radical(const KPoly& f) const {
        if (f.is_zero_poly()) return true;
        if (contains(f)) return true;
        if (f.is_constant()) return false; // nonzero constants never vanish
        EnvPtr env2;
        RingPtr ring2 = d_->ring->with_aux_var("_rab" + std::to_string(d_->ring->env()->size()), env2);
        std::vector<KPoly> in = d_->gens;
        for (auto& rel : ring2->local_relations()) in.push_back(rel);
        KPoly y = KPoly::variable(ring2->vars().size() - 1);
        in.push_back(KPoly::constant(RatExpr(1)) - y * f);
        auto gb = buchberger(ring2, std::move(in), ring2->order());
        return gb.size() == 1 && gb[0].is_constant();
    }

    /// f is a unit of the quotient by the (localized) ideal iff
    /// <gens, locals, f> is the unit ideal.
    bool is_unit_mod(const KPoly& f) const {
        if (f.is_zero_poly()) return is_unit_ideal();
        if (f.is_constant()) return true;
        return with({f}).is_unit_ideal();
    }

    PolyIdeal with(std::vector<KPoly> more) const {
        std::vector<KPoly> g = d_->gens;
        for (auto& m : more)
            if (!m.is_zero_poly()) g.push_back(std::move(m));
        return PolyIdeal(d_->ring, std::move(g));
    }

    /// Generators of the elimination ideal: members of this ideal free of the
    /// given ring positions (inverse symbols whose base polynomial touches an
    /// eliminated coordinate are eliminated along with it).
    std::vector<KPoly> eliminate(std::vector<std::size_t> positions) const {
        std::set<std::size_t> cut(positions.begin(), positions.end());
        for (auto& l : d_->ring->locals()) {
            bool touches = false;
            for (std::size_t p : positions) {
                if (d_->ring->is_inverse_pos(p)) continue;
                std::size_t env_idx = d_->ring->vars()[p];
                if (l.base.uses_var(env_idx)) touches = true;
            }
            if (touches) cut.insert(l.inv_pos);
        }
        std::vector<char> mask(d_->ring->vars().size(), 0);
        for (std::size_t p : cut) mask[p] = 1;
        RingPtr bring = d_->ring->with_order(Order::block(mask));
        std::vector<KPoly> in = d_->gens;
        for (auto& rel : d_->ring->local_relations()) in.push_back(rel);
        auto gb = buchberger(bring, std::move(in), bring->order());
        std::vector<KPoly> out;
        for (auto& g : gb) {
            bool free_of = true;
            for (std::size_t p : cut)
                if (g.uses_var(p)) free_of = false;
            if (free_of) out.push_back(g);
        }
        return out;
    }

    bool equals(const PolyIdeal& other) const {
        for (auto& g : other.gens())
            if (!contains(g)) return false;
        for (auto& g : gens())
            if (!other.contains(g)) return false;
        return true;
    }

    std::vector<std::string> printed_gens() const {
        std::vector<std::string> out;
        for (auto& g : d_->gens) out.push_back(d_->ring->kpoly_str(g));
        return out;
    }

private:
    struct Data {
        RingPtr ring;
        std::vector<KPoly> gens;
        mutable std::mutex mu;
        mutable std::optional<std::vector<KPoly>> gb;
    };
    std::shared_ptr<Data> d_;
};

inline bool ideals_equal(const PolyIdeal& a, const PolyIdeal& b) { return a.equals(b); }

} // namespace kps
