#pragma once

#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "kps/exterior.hpp"
#include "kps/quotient.hpp"

namespace kps {

/// k closed two-forms and a Hamiltonian function on one chart.
struct KPresymplecticSystem {
    ChartPtr chart;
    std::vector<TwoForm> omega;
    RatExpr H;

    std::size_t k() const { return omega.size(); }
};

/// Extra linear condition on the unknown components (column index A*n + i),
/// appended to the field equation (e.g. second-order conditions).
struct LinearRow {
    std::vector<std::pair<std::size_t, RatExpr>> lhs;
    RatExpr rhs;
    std::string label;
};

struct RunOptions {
    std::size_t max_iterations = 10;
    bool verify = false;
    std::vector<LinearRow> extra_rows;
};

/// Constraints found by one iteration (normalized polynomial representatives).
struct Generation {
    std::vector<QPoly> polys;
    std::vector<std::string> printed;
};

enum class RunStatus { stabilized, empty, max_iterations, undecidable_pivot };

inline const char* status_name(RunStatus s) {
    switch (s) {
    case RunStatus::stabilized: return "stabilized";
    case RunStatus::empty: return "empty";
    case RunStatus::max_iterations: return "max_iterations";
    case RunStatus::undecidable_pivot: return "undecidable_pivot";
    }
    return "unknown";
}

/// The general solution: components affine in the surviving free parameters
/// lam1, lam2, ... (free-function symbols appended to the chart environment).
struct Family {
    EnvPtr env;
    std::size_t k = 0, n = 0;
    std::vector<std::vector<RatExpr>> comp; ///< k x n, determinations substituted
    std::vector<std::string> free_params;
    std::vector<std::pair<std::string, RatExpr>> determinations;
    std::vector<std::vector<RatExpr>> particular; ///< comp with free params set to 0
    std::vector<std::pair<std::string, std::vector<std::vector<RatExpr>>>> homogeneous;
};

struct AlgorithmReport {
    RunStatus status = RunStatus::stabilized;
    std::size_t iterations = 0;
    std::vector<Generation> generations;
    PolyIdeal final_ideal;
    Family family;
    std::vector<std::string> warnings;
    std::string pivot_note;
    std::vector<std::string> verification_failures;
};

// ------------------------------------------------------------- field equation

/// Rows of sum_A i(X_A) omega^A = dH over the quotient context, one per chart
/// coordinate, followed by any extra linear rows.  Unknown column A*n + i is
/// the d/dx_i component of X_A.
inline std::vector<QuotRow> field_equation_rows(const KPresymplecticSystem& sys,
                                                const QuotCtx& ctx,
                                                const std::vector<LinearRow>& extra,
                                                std::vector<std::string>* warnings) {
    const ChartPtr& ch = sys.chart;
    std::size_t n = ch->dim(), k = sys.k();
    std::vector<QuotRow> rows;
    rows.reserve(n + extra.size());
    for (std::size_t j = 0; j < n; ++j) {
        QuotRow row;
        row.a.assign(k * n, QuotElem{});
        for (std::size_t A = 0; A < k; ++A)
            for (std::size_t i = 0; i < n; ++i) {
                RatExpr w = sys.omega[A].get(i, j);
                if (!w.is_zero_expr()) row.a[A * n + i] = q_from_expr(ctx, w, warnings);
            }
        row.b = q_from_expr(ctx, ch->deriv(sys.H, j), warnings);
        rows.push_back(std::move(row));
    }
    for (auto& er : extra) {
        QuotRow row;
        row.a.assign(k * n, QuotElem{});
        for (auto& [c, e] : er.lhs)
            row.a.at(c) = q_add(ctx, row.a.at(c), q_from_expr(ctx, e, warnings));
        row.b = q_from_expr(ctx, er.rhs, warnings);
        rows.push_back(std::move(row));
    }
    return rows;
}

// ------------------------------------------------------------ common kernel

/// Nullspace of Z -> (i(Z)omega^A)_A over the given context: a basis of the
/// intersection of the kernels of all the omega^A on the locus.
inline std::vector<std::vector<QuotElem>> kernel_intersection(const KPresymplecticSystem& sys,
                                                              const QuotCtx& ctx,
                                                              std::vector<std::string>* warnings) {
    const ChartPtr& ch = sys.chart;
    std::size_t n = ch->dim();
    std::vector<QuotRow> rows;
    for (std::size_t A = 0; A < sys.k(); ++A)
        for (std::size_t j = 0; j < n; ++j) {
            QuotRow row;
            row.a.assign(n, QuotElem{});
            for (std::size_t i = 0; i < n; ++i) {
                RatExpr w = sys.omega[A].get(i, j);
                if (!w.is_zero_expr()) row.a[i] = q_from_expr(ctx, w, warnings);
            }
            rows.push_back(std::move(row));
        }
    return solve_affine(ctx, std::move(rows), n).nullspace;
}

inline std::vector<VectorField> kernel_intersection_basis(const KPresymplecticSystem& sys) {
    QuotCtx ctx(sys.chart->zero_ideal());
    std::vector<VectorField> out;
    for (auto& v : kernel_intersection(sys, ctx, nullptr)) {
        VectorField X = VectorField::zero(sys.chart);
        for (std::size_t i = 0; i < v.size(); ++i) X.comp[i] = q_expr(ctx.ring(), v[i]);
        out.push_back(std::move(X));
    }
    return out;
}

/// Pairings Z_mu(H) for a common-kernel basis: the functions whose vanishing
/// is equivalent to solvability of the field equation.
inline std::vector<RatExpr> primary_constraint_functions(const KPresymplecticSystem& sys) {
    std::vector<RatExpr> out;
    for (auto& Z : kernel_intersection_basis(sys)) out.push_back(apply(Z, sys.H));
    return out;
}

// ------------------------------------------------------------------- driver

namespace detail {

inline Family build_family(const KPresymplecticSystem& sys, const LinearSolveOutcome& o1,
                           const LinearSolveOutcome& o2) {
    const ChartPtr& ch = sys.chart;
    const RingPtr& ring = ch->ring();
    std::size_t n = ch->dim(), k = sys.k(), F = o1.free_cols.size();

    Family fam;
    fam.k = k;
    fam.n = n;
    std::vector<symbol_info> lams;
    for (std::size_t f = 0; f < F; ++f)
        lams.emplace_back("lam" + std::to_string(f + 1), symbol_kind::free_function);
    EnvPtr efam = ch->env()->extended(lams);
    fam.env = efam;
    std::size_t base = ch->env()->size();
    auto lamvar = [&](std::size_t f) { return RatExpr::variable(efam, base + f); };

    // each first-level free column either survives or is determined by the
    // tangency solve (affine in the surviving parameters)
    std::vector<RatExpr> lamsub(F, RatExpr(efam, Rational(0)));
    for (std::size_t f = 0; f < F; ++f) {
        std::string name = "lam" + std::to_string(f + 1);
        if (f < o2.pivot_row_of.size() && o2.pivot_row_of[f] >= 0) {
            RatExpr det = q_expr(ring, o2.particular[f]) + RatExpr(efam, Rational(0));
            for (std::size_t g2 = 0; g2 < o2.free_cols.size(); ++g2) {
                RatExpr c = q_expr(ring, o2.nullspace[g2][f]);
                if (!c.is_zero_expr()) det = det + c * lamvar(o2.free_cols[g2]);
            }
            lamsub[f] = det;
            fam.determinations.emplace_back(name, det);
        } else {
            lamsub[f] = lamvar(f);
            fam.free_params.push_back(name);
        }
    }

    fam.comp.assign(k, std::vector<RatExpr>(n, RatExpr(efam, Rational(0))));
    for (std::size_t A = 0; A < k; ++A)
        for (std::size_t i = 0; i < n; ++i) {
            RatExpr e = q_expr(ring, o1.particular[A * n + i]) + RatExpr(efam, Rational(0));
            for (std::size_t f = 0; f < F; ++f) {
                RatExpr h = q_expr(ring, o1.nullspace[f][A * n + i]);
                if (!h.is_zero_expr()) e = e + h * lamsub[f];
            }
            fam.comp[A][i] = e;
        }

    std::map<std::size_t, RatExpr> all_zero;
    for (auto& name : fam.free_params)
        all_zero[std::size_t(efam->require(name))] = RatExpr(efam, Rational(0));
    auto substituted = [&](const std::map<std::size_t, RatExpr>& m) {
        std::vector<std::vector<RatExpr>> out(k);
        for (std::size_t A = 0; A < k; ++A)
            for (std::size_t i = 0; i < n; ++i) out[A].push_back(fam.comp[A][i].substitute(m, efam));
        return out;
    };
    fam.particular = substituted(all_zero);
    for (auto& name : fam.free_params) {
        std::map<std::size_t, RatExpr> m = all_zero;
        m[std::size_t(efam->require(name))] = RatExpr(efam, Rational(1));
        auto inst = substituted(m);
        for (std::size_t A = 0; A < k; ++A)
            for (std::size_t i = 0; i < n; ++i)
                inst[A][i] = inst[A][i] - fam.particular[A][i];
        fam.homogeneous.emplace_back(name, std::move(inst));
    }
    return fam;
}

} // namespace detail

/// Instantiate the family's free parameters (missing names default to zero).
/// The target environment must contain every non-parameter symbol by name.
inline std::vector<std::vector<RatExpr>> instantiate(const Family& fam,
                                                     const std::map<std::string, RatExpr>& bindings,
                                                     EnvPtr target) {
    std::map<std::size_t, RatExpr> m;
    for (auto& name : fam.free_params) {
        auto it = bindings.find(name);
        m[std::size_t(fam.env->require(name))] =
            it != bindings.end() ? it->second : RatExpr(target, Rational(0));
    }
    std::vector<std::vector<RatExpr>> out(fam.k);
    for (std::size_t A = 0; A < fam.k; ++A)
        for (std::size_t i = 0; i < fam.n; ++i)
            out[A].push_back(fam.comp[A][i].substitute(m, target));
    return out;
}

/// Pairwise Lie brackets [X_A, X_B], A < B, of an instantiated family; the
/// obstruction to integrability of the k-vector field.
inline std::vector<std::tuple<std::size_t, std::size_t, VectorField>>
integrability_residual(const KPresymplecticSystem& sys,
                       const std::vector<std::vector<RatExpr>>& comps) {
    std::vector<std::tuple<std::size_t, std::size_t, VectorField>> out;
    for (std::size_t A = 0; A < comps.size(); ++A)
        for (std::size_t B = A + 1; B < comps.size(); ++B) {
            VectorField XA{sys.chart, comps[A]};
            VectorField XB{sys.chart, comps[B]};
            out.emplace_back(A, B, bracket(XA, XB));
        }
    return out;
}

/// The constraint algorithm.  Each iteration freshly solves the field
/// equation modulo the current ideal (unsatisfiable rows yield constraints),
/// then demands tangency of the whole solution family to every accumulated
/// constraint (rows free of the family parameters yield constraints; the
/// rest determine parameters).  Solvability failures belong to the current
/// generation; tangency failures restrict the submanifold one step further
/// and are reported as the next generation, though the ideal absorbs them
/// immediately.  Stops when an iteration finds nothing new
/// (stabilized), when the locus becomes empty, or at the iteration cap.
inline AlgorithmReport run_algorithm(const KPresymplecticSystem& sys, RunOptions opt = {}) {
    const ChartPtr& ch = sys.chart;
    const RingPtr& ring = ch->ring();
    std::size_t n = ch->dim(), k = sys.k();

    AlgorithmReport rep;
    PolyIdeal I = ch->zero_ideal();
    rep.final_ideal = I;
    std::vector<QPoly> accum;
    Generation pending; // tangency finds, reported as the following generation
    if (opt.max_iterations == 0) {
        rep.status = RunStatus::max_iterations;
        return rep;
    }

    for (std::size_t iter = 1; iter <= opt.max_iterations; ++iter) {
        rep.iterations = iter;
        QuotCtx ctx(I);
        LinearSolveOutcome o1;
        try {
            o1 = solve_affine(ctx, field_equation_rows(sys, ctx, opt.extra_rows, &rep.warnings),
                              k * n);
        } catch (const undecidable_pivot_error& e) {
            rep.status = RunStatus::undecidable_pivot;
            rep.pivot_note = e.what();
            rep.final_ideal = I;
            return rep;
        }

        Generation gen = std::move(pending);
        pending = Generation{};
        PolyIdeal I2 = I;
        auto adjoin = [&](const RatExpr& xi, Generation& bucket) {
            auto p = ring->normalize_constraint(xi, &rep.warnings);
            if (!p) return;
            KPoly kpol = ring->poly_from(*p);
            if (I2.in_radical(kpol)) return; // already implied on the locus
            bucket.polys.push_back(*p);
            bucket.printed.push_back(print_poly(*p, *ch->env()));
            accum.push_back(*p);
            I2 = I2.with({kpol});
        };
        for (auto& r : o1.residuals) adjoin(r, gen);

        QuotCtx ctx2(I2);
        std::size_t F = o1.free_cols.size();
        std::vector<QuotRow> trows;
        for (auto& xi : accum) {
            RatExpr xie = RatExpr::from_poly(ch->env(), xi);
            std::vector<QuotElem> dxi(n);
            for (std::size_t j = 0; j < n; ++j)
                dxi[j] = q_from_expr(ctx2, ch->deriv(xie, j), &rep.warnings);
            for (std::size_t A = 0; A < k; ++A) {
                QuotRow row;
                row.a.assign(F, QuotElem{});
                QuotElem c0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (dxi[i].num.is_zero_poly()) continue;
                    c0 = q_add(ctx2, c0, q_mul(ctx2, o1.particular[A * n + i], dxi[i]));
                    for (std::size_t f = 0; f < F; ++f)
                        row.a[f] =
                            q_add(ctx2, row.a[f], q_mul(ctx2, o1.nullspace[f][A * n + i], dxi[i]));
                }
                row.b = q_neg(c0);
                trows.push_back(std::move(row));
            }
        }
        LinearSolveOutcome o2;
        try {
            o2 = solve_affine(ctx2, std::move(trows), F);
        } catch (const undecidable_pivot_error& e) {
            rep.status = RunStatus::undecidable_pivot;
            rep.pivot_note = e.what();
            rep.final_ideal = I2;
            if (!gen.polys.empty()) rep.generations.push_back(std::move(gen));
            return rep;
        }
        for (auto& r : o2.residuals) adjoin(r, pending);

        if (gen.polys.empty() && pending.polys.empty()) {
            if (iter > 1) rep.generations.push_back(Generation{}); // stabilizing pass on record
            rep.status = RunStatus::stabilized;
            rep.final_ideal = I;
            rep.family = detail::build_family(sys, o1, o2);
            break;
        }
        if (!gen.polys.empty()) rep.generations.push_back(std::move(gen));
        if (I2.is_unit_ideal()) {
            rep.status = RunStatus::empty;
            rep.final_ideal = I2;
            if (!pending.polys.empty()) rep.generations.push_back(std::move(pending));
            return rep;
        }
        I = I2;
        rep.final_ideal = I;
        if (iter == opt.max_iterations) {
            rep.status = RunStatus::max_iterations;
            if (!pending.polys.empty()) rep.generations.push_back(std::move(pending));
            return rep;
        }
    }

    if (rep.status != RunStatus::stabilized) return rep;

    if (opt.verify) {
        const Family& fam = rep.family;
        std::map<std::size_t, RatExpr> zeros;
        for (auto& name : fam.free_params)
            zeros[std::size_t(fam.env->require(name))] = RatExpr(ch->env(), Rational(0));
        auto check_zero = [&](const RatExpr& e, const std::string& what) {
            std::vector<RatExpr> parts;
            parts.push_back(e.substitute(zeros, ch->env()));
            for (auto& name : fam.free_params) {
                auto m = zeros;
                m[std::size_t(fam.env->require(name))] = RatExpr(ch->env(), Rational(1));
                parts.push_back(e.substitute(m, ch->env()) - parts.front());
            }
            for (auto& p : parts) {
                auto loc = ring->localize(p);
                if (!rep.final_ideal.in_radical(loc.poly))
                    rep.verification_failures.push_back(what);
            }
        };
        for (std::size_t j = 0; j < n; ++j) {
            RatExpr lhs(fam.env, Rational(0));
            for (std::size_t A = 0; A < k; ++A)
                for (std::size_t i = 0; i < n; ++i) {
                    RatExpr w = sys.omega[A].get(i, j);
                    if (!w.is_zero_expr()) lhs = lhs + fam.comp[A][i] * w;
                }
            check_zero(lhs - ch->deriv(sys.H, j),
                       "field equation row " + ch->coord_display(j));
        }
        for (auto& er : opt.extra_rows) {
            RatExpr lhs(fam.env, Rational(0));
            for (auto& [c, e] : er.lhs) lhs = lhs + e * fam.comp[c / n][c % n];
            check_zero(lhs - er.rhs, "extra row " + er.label);
        }
        for (auto& xi : accum) {
            RatExpr xie = RatExpr::from_poly(ch->env(), xi);
            for (std::size_t A = 0; A < k; ++A) {
                RatExpr t(fam.env, Rational(0));
                for (std::size_t i = 0; i < n; ++i)
                    t = t + fam.comp[A][i] * ch->deriv(xie, i);
                check_zero(t, "tangency of " + print_poly(xi, *ch->env()) + " along X_" +
                                  std::to_string(A + 1));
            }
        }
    }
    return rep;
}

} // namespace kps
