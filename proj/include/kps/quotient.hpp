#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kps/ideal.hpp"

namespace kps {

/// Decision context for linear algebra over the quotient by a constraint
/// ideal: equality means "equal as functions on the constraint locus", so
/// zero tests are radical-membership tests and pivots must be certified
/// units.  Results are cached per printed normal form.
class QuotCtx {
public:
    explicit QuotCtx(PolyIdeal ideal) : ideal_(std::move(ideal)) {}

    const PolyIdeal& ideal() const { return ideal_; }
    const RingPtr& ring() const { return ideal_.ring(); }

    /// Does f vanish identically on the constraint locus?
    bool is_zero(const KPoly& f) const {
        if (f.is_zero_poly()) return true;
        KPoly r = ideal_.reduce(f);
        if (r.is_zero_poly()) return true;
        std::string key = ring()->kpoly_str(r);
        auto it = zero_cache_.find(key);
        if (it != zero_cache_.end()) return it->second;
        bool z = ideal_.in_radical(r);
        zero_cache_.emplace(std::move(key), z);
        return z;
    }

    /// Is f invertible in a neighbourhood of the locus (a unit mod the ideal)?
    bool is_unit(const KPoly& f) const {
        if (f.is_zero_poly()) return ideal_.is_unit_ideal();
        if (f.is_constant()) return true;
        std::string key = ring()->kpoly_str(f);
        auto it = unit_cache_.find(key);
        if (it != unit_cache_.end()) return it->second;
        bool u = ideal_.is_unit_mod(f);
        unit_cache_.emplace(std::move(key), u);
        return u;
    }

    /// Is f invertible on the whole chart (a unit of the localized ring,
    /// irrespective of the constraint ideal)?  Such elements make the most
    /// stable pivots: their inverses introduce no locus-bound denominators.
    bool is_ambient_unit(const KPoly& f) const {
        if (f.is_zero_poly()) return false;
        if (f.is_constant()) return true;
        std::string key = ring()->kpoly_str(f);
        auto it = ambient_cache_.find(key);
        if (it != ambient_cache_.end()) return it->second;
        if (!ambient_) ambient_ = PolyIdeal(ring(), {});
        bool u = ambient_->is_unit_mod(f);
        ambient_cache_.emplace(std::move(key), u);
        return u;
    }

private:
    PolyIdeal ideal_;
    mutable std::optional<PolyIdeal> ambient_;
    mutable std::map<std::string, bool> zero_cache_;
    mutable std::map<std::string, bool> unit_cache_;
    mutable std::map<std::string, bool> ambient_cache_;
};

/// Element of the quotient field: num / den where den is a product of
/// certified units (declared nonvanishing leftovers and unit pivots).
struct QuotElem {
    KPoly num;
    KPoly den = KPoly::constant(RatExpr(1));

    static QuotElem one() { return QuotElem{KPoly::constant(RatExpr(1))}; }
};

inline QuotElem q_reduce(const QuotCtx& ctx, QuotElem a) {
    a.num = ctx.ideal().reduce(a.num);
    if (a.num.is_zero_poly()) a.den = KPoly::constant(RatExpr(1));
    return a;
}

inline QuotElem q_add(const QuotCtx& ctx, const QuotElem& a, const QuotElem& b) {
    return q_reduce(ctx, QuotElem{a.num * b.den + b.num * a.den, a.den * b.den});
}

inline QuotElem q_sub(const QuotCtx& ctx, const QuotElem& a, const QuotElem& b) {
    return q_reduce(ctx, QuotElem{a.num * b.den - b.num * a.den, a.den * b.den});
}

inline QuotElem q_mul(const QuotCtx& ctx, const QuotElem& a, const QuotElem& b) {
    return q_reduce(ctx, QuotElem{a.num * b.num, a.den * b.den});
}

inline QuotElem q_neg(const QuotElem& a) { return QuotElem{-a.num, a.den}; }

/// a / b; the caller must have certified b.num as a unit.
inline QuotElem q_div(const QuotCtx& ctx, const QuotElem& a, const QuotElem& b) {
    return q_reduce(ctx, QuotElem{a.num * b.den, a.den * b.num});
}

inline RatExpr q_expr(const RingPtr& ring, const QuotElem& a) {
    RatExpr n = ring->to_expr(a.num);
    if (a.den.is_constant())
        return a.den.constant_value() == 1 ? n : n / RatExpr(a.den.constant_value());
    return n / ring->to_expr(a.den);
}

/// Build a quotient element from an expression.  Denominator factors covered
/// by the chart's nonvanishing declarations become inverse symbols in the
/// numerator; anything left over moves to `den`.  A leftover involving
/// coordinates draws a warning (the solve proceeds on the open set where it
/// does not vanish); one made of parameters alone is a unit of the
/// coefficient field and needs no assumption.
inline QuotElem q_from_expr(const QuotCtx& ctx, const RatExpr& f,
                            std::vector<std::string>* warnings) {
    auto loc = ctx.ring()->localize(f);
    QuotElem q;
    q.num = ctx.ideal().reduce(loc.poly);
    if (!loc.leftover_den.is_constant()) {
        const SymbolEnv& env = *ctx.ring()->env();
        bool params_only = true;
        for (auto& [m, c] : loc.leftover_den.terms())
            for (std::size_t i = 0; i < m.size() && params_only; ++i)
                if (m[i] != 0 && env.at(i).kind != symbol_kind::parameter) params_only = false;
        if (!params_only && warnings)
            warnings->push_back("assuming nonvanishing denominator: " +
                                print_poly(loc.leftover_den, *ctx.ring()->env()));
        q.den = ctx.ring()->poly_from(loc.leftover_den);
    }
    return q;
}

// ------------------------------------------------------- affine linear solve

struct QuotRow {
    std::vector<QuotElem> a;
    QuotElem b;
};

/// Pivot admission: solution families need pivots invertible everywhere on
/// the locus (certified units); span diagnostics work over the function
/// field, where any element nonzero on the locus may be inverted.
enum class PivotPolicy { certified_units, generic_nonzero };

struct LinearSolveOutcome {
    std::size_t ncols = 0;
    std::vector<int> pivot_row_of;                ///< per column; -1 = free
    std::vector<std::size_t> free_cols;
    std::vector<QuotElem> particular;             ///< free unknowns set to zero
    std::vector<std::vector<QuotElem>> nullspace; ///< one basis vector per free column
    std::vector<RatExpr> residuals;               ///< unsatisfiable row right-hand sides
    std::vector<std::string> pivot_log;           ///< unit certificates, in pivot order

    bool consistent() const { return residuals.empty(); }
};

/// Solve A x = b over the quotient field by column-major Gauss-Jordan
/// elimination.  Deterministic: columns left to right; within a column the
/// first unused row whose entry is an ambient unit wins, then the first
/// holding a mod-ideal unit (under the generic policy, any nonvanishing
/// entry); a column without an admissible pivot is left free regardless of
/// other nonzero entries — those entries feed the nullspace through whichever
/// row pivots elsewhere.  Entries that vanish on the locus are replaced by
/// exact zeros.  After the sweep, a leftover row still carrying a
/// nonvanishing coefficient has no certifiable leading unknown:
/// undecidable_pivot_error (impossible under the generic policy).
inline LinearSolveOutcome solve_affine(const QuotCtx& ctx, std::vector<QuotRow> rows,
                                       std::size_t ncols,
                                       PivotPolicy policy = PivotPolicy::certified_units) {
    const RingPtr& ring = ctx.ring();
    for (auto& r : rows)
        if (r.a.size() != ncols) throw error("solve_affine: ragged row");

    LinearSolveOutcome out;
    out.ncols = ncols;
    out.pivot_row_of.assign(ncols, -1);
    std::vector<char> used(rows.size(), 0);

    for (std::size_t col = 0; col < ncols; ++col) {
        int pivot_row = -1, unit_row = -1;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (used[r]) continue;
            QuotElem& e = rows[r].a[col];
            if (ctx.is_zero(e.num)) {
                if (!e.num.is_zero_poly()) e = QuotElem{};
                continue;
            }
            if (policy == PivotPolicy::generic_nonzero || ctx.is_ambient_unit(e.num)) {
                pivot_row = int(r);
                break;
            }
            if (unit_row < 0 && ctx.is_unit(e.num)) unit_row = int(r);
        }
        if (pivot_row < 0) pivot_row = unit_row;
        if (pivot_row < 0) {
            out.free_cols.push_back(col);
            continue;
        }
        std::size_t pr = std::size_t(pivot_row);
        used[pr] = 1;
        out.pivot_row_of[col] = int(pr);
        out.pivot_log.push_back(ring->kpoly_str(rows[pr].a[col].num));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r == pr) continue;
            QuotElem& e = rows[r].a[col];
            if (e.num.is_zero_poly()) continue;
            if (ctx.is_zero(e.num)) {
                e = QuotElem{};
                continue;
            }
            QuotElem factor = q_div(ctx, e, rows[pr].a[col]);
            for (std::size_t c2 = 0; c2 < ncols; ++c2) {
                if (c2 == col) continue;
                rows[r].a[c2] = q_sub(ctx, rows[r].a[c2], q_mul(ctx, factor, rows[pr].a[c2]));
            }
            rows[r].b = q_sub(ctx, rows[r].b, q_mul(ctx, factor, rows[pr].b));
            rows[r].a[col] = QuotElem{}; // eliminated exactly
        }
    }

    out.particular.assign(ncols, QuotElem{});
    for (std::size_t col = 0; col < ncols; ++col) {
        int r = out.pivot_row_of[col];
        if (r >= 0)
            out.particular[col] =
                q_div(ctx, rows[std::size_t(r)].b, rows[std::size_t(r)].a[col]);
    }
    for (std::size_t f : out.free_cols) {
        std::vector<QuotElem> v(ncols, QuotElem{});
        v[f] = QuotElem::one();
        for (std::size_t col = 0; col < ncols; ++col) {
            int r = out.pivot_row_of[col];
            if (r < 0) continue;
            const QuotElem& coef = rows[std::size_t(r)].a[f];
            if (coef.num.is_zero_poly() || ctx.is_zero(coef.num)) continue;
            v[col] = q_neg(q_div(ctx, coef, rows[std::size_t(r)].a[col]));
        }
        out.nullspace.push_back(std::move(v));
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (used[r]) continue;
        for (std::size_t c = 0; c < ncols; ++c) {
            const QuotElem& e = rows[r].a[c];
            if (!e.num.is_zero_poly() && !ctx.is_zero(e.num))
                throw undecidable_pivot_error(ring->kpoly_str(e.num));
        }
        if (!ctx.is_zero(rows[r].b.num)) out.residuals.push_back(ring->to_expr(rows[r].b.num));
    }
    return out;
}

// -------------------------------------------------------------- span checks

/// Is w a quotient-field linear combination of the given vectors?  Uses
/// generic pivoting: membership over the function field of the locus.
inline bool in_span(const QuotCtx& ctx, const std::vector<std::vector<QuotElem>>& vecs,
                    const std::vector<QuotElem>& w) {
    if (vecs.empty()) {
        for (auto& e : w)
            if (!ctx.is_zero(e.num)) return false;
        return true;
    }
    std::size_t n = w.size();
    std::vector<QuotRow> rows(n);
    for (std::size_t j = 0; j < n; ++j) {
        rows[j].a.resize(vecs.size());
        for (std::size_t c = 0; c < vecs.size(); ++c) rows[j].a[c] = vecs[c][j];
        rows[j].b = w[j];
    }
    return solve_affine(ctx, std::move(rows), vecs.size(), PivotPolicy::generic_nonzero)
        .consistent();
}

inline bool spans_equal(const QuotCtx& ctx, const std::vector<std::vector<QuotElem>>& a,
                        const std::vector<std::vector<QuotElem>>& b) {
    for (auto& v : b)
        if (!in_span(ctx, a, v)) return false;
    for (auto& v : a)
        if (!in_span(ctx, b, v)) return false;
    return true;
}

} // namespace kps
