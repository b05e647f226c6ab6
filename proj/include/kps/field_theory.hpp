#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kps/chart.hpp"
#include "kps/constraint.hpp"
#include "kps/exterior.hpp"
#include "kps/ideal.hpp"

namespace kps {

/// Base data of a first-order field theory: the field components (fibre
/// coordinates), the number k of independent directions, optional direction
/// aliases used for display and input (e.g. {"t","s"} so `q_v1` prints and
/// parses as `q_vt`), parameters, and nonvanishing declarations (expression
/// strings over the velocity chart).
struct FieldModel {
    std::vector<std::string> fields;
    std::size_t k = 1;
    std::vector<std::string> directions;
    std::vector<std::string> params;
    std::vector<std::string> nonvanishing;
    ResourceLimits limits;
};

namespace field_detail {

inline std::string direction_suffix(const FieldModel& m, std::size_t A) {
    return m.directions.empty() ? std::to_string(A + 1) : m.directions.at(A);
}

inline std::vector<symbol_info> base_symbols(const FieldModel& m) {
    std::vector<symbol_info> out;
    for (auto& f : m.fields) out.emplace_back(f, symbol_kind::coordinate);
    return out;
}

/// Velocity coordinates v^i_A, field-major: q_v1, q_v2, e_v1, e_v2, ...
inline std::vector<symbol_info> velocity_symbols(const FieldModel& m) {
    std::vector<symbol_info> out;
    for (auto& f : m.fields)
        for (std::size_t A = 0; A < m.k; ++A)
            out.emplace_back(f + "_v" + std::to_string(A + 1),
                             f + "_v" + direction_suffix(m, A), symbol_kind::coordinate);
    return out;
}

/// Momentum coordinates p^i_A, same layout with suffix `_p`.
inline std::vector<symbol_info> momentum_symbols(const FieldModel& m) {
    std::vector<symbol_info> out;
    for (auto& f : m.fields)
        for (std::size_t A = 0; A < m.k; ++A)
            out.emplace_back(f + "_p" + std::to_string(A + 1),
                             f + "_p" + direction_suffix(m, A), symbol_kind::coordinate);
    return out;
}

} // namespace field_detail

/// Generic rank of a matrix of expressions over the rational function field,
/// by Gaussian elimination with exact zero tests.
inline std::size_t generic_rank(std::vector<std::vector<RatExpr>> m) {
    if (m.empty()) return 0;
    std::size_t nrows = m.size(), ncols = m[0].size(), row = 0, rank = 0;
    for (std::size_t col = 0; col < ncols && row < nrows; ++col) {
        std::size_t piv = nrows;
        for (std::size_t r = row; r < nrows; ++r)
            if (!m[r][col].is_zero_expr()) {
                piv = r;
                break;
            }
        if (piv == nrows) continue;
        std::swap(m[piv], m[row]);
        for (std::size_t r = 0; r < nrows; ++r) {
            if (r == row || m[r][col].is_zero_expr()) continue;
            RatExpr f = m[r][col] / m[row][col];
            for (std::size_t c = 0; c < ncols; ++c) m[r][c] = m[r][c] - f * m[row][c];
        }
        ++row;
        ++rank;
    }
    return rank;
}

/// Primary momentum-side constraints: the image of the Legendre map as a
/// polynomial ideal on the momentum chart.
struct PrimaryConstraints {
    PolyIdeal ideal;
    std::vector<QPoly> polys;          ///< normalized representatives
    std::vector<std::string> printed;
};

/// A first-order Lagrangian field theory on its velocity chart
/// (q^1..q^n, v^1_1..v^n_k), with the derived presymplectic structure,
/// energy, Legendre map, and momentum-side primary constraints.
class LagrangianSystem {
public:
    static LagrangianSystem create(FieldModel model, const std::string& lagrangian_text) {
        LagrangianSystem ls;
        ls.model_ = std::move(model);
        const FieldModel& m = ls.model_;
        if (m.fields.empty()) throw input_error("field theory needs at least one field");
        if (m.k == 0) throw input_error("number of directions k must be positive");
        if (!m.directions.empty() && m.directions.size() != m.k)
            throw input_error("direction alias list must have one entry per direction");
        ls.nf_ = m.fields.size();

        auto vcoords = field_detail::base_symbols(m);
        for (auto& s : field_detail::velocity_symbols(m)) vcoords.push_back(s);
        ls.vel_ = Chart::create(vcoords, m.params, m.nonvanishing, m.limits);
        ls.L_ = ls.vel_->parse(lagrangian_text);

        // Momentum chart.  Only declarations expressible over base coordinates
        // and parameters transfer; velocity-dependent ones stay velocity-side.
        auto mcoords = field_detail::base_symbols(m);
        for (auto& s : field_detail::momentum_symbols(m)) mcoords.push_back(s);
        std::vector<std::string> mnonvan;
        for (auto& text : m.nonvanishing) {
            RatExpr f = ls.vel_->parse(text);
            bool base_only = true;
            for (std::size_t i = 0; i < ls.nf_ * m.k; ++i) {
                std::size_t idx = ls.vel_->coord_env(ls.nf_ + i);
                if (f.num().uses_var(idx) || f.den().uses_var(idx)) base_only = false;
            }
            if (base_only) mnonvan.push_back(text);
        }
        ls.mom_ = Chart::create(mcoords, m.params, std::move(mnonvan), m.limits);

        // Joint chart (base, velocities, momenta) for Legendre-graph work.
        auto jcoords = field_detail::base_symbols(m);
        for (auto& s : field_detail::velocity_symbols(m)) jcoords.push_back(s);
        for (auto& s : field_detail::momentum_symbols(m)) jcoords.push_back(s);
        ls.joint_ = Chart::create(jcoords, m.params, m.nonvanishing, m.limits);
        return ls;
    }

    const FieldModel& model() const { return model_; }
    std::size_t k() const { return model_.k; }
    std::size_t fields() const { return nf_; }
    const ChartPtr& velocity_chart() const { return vel_; }
    const ChartPtr& momentum_chart() const { return mom_; }
    const ChartPtr& joint_chart() const { return joint_; }
    const RatExpr& lagrangian() const { return L_; }

    std::size_t base_position(std::size_t i) const { return i; }
    std::size_t velocity_position(std::size_t i, std::size_t A) const {
        return nf_ + i * model_.k + A;
    }
    /// On the momentum chart.
    std::size_t momentum_position(std::size_t i, std::size_t A) const {
        return nf_ + i * model_.k + A;
    }
    /// On the joint chart.
    std::size_t joint_velocity_position(std::size_t i, std::size_t A) const {
        return nf_ + i * model_.k + A;
    }
    std::size_t joint_momentum_position(std::size_t i, std::size_t A) const {
        return nf_ + nf_ * model_.k + i * model_.k + A;
    }

    RatExpr velocity(std::size_t i, std::size_t A) const {
        return vel_->coordinate(velocity_position(i, A));
    }
    RatExpr dLdv(std::size_t i, std::size_t A) const {
        return vel_->deriv(L_, velocity_position(i, A));
    }
    RatExpr dLdq(std::size_t i) const { return vel_->deriv(L_, i); }

    /// Lagrangian one-forms theta^A = sum_i (dL/dv^i_A) dq^i.
    std::vector<OneForm> theta() const {
        std::vector<OneForm> out;
        for (std::size_t A = 0; A < model_.k; ++A) {
            OneForm th = OneForm::zero(vel_);
            for (std::size_t i = 0; i < nf_; ++i) th.comp[i] = dLdv(i, A);
            out.push_back(std::move(th));
        }
        return out;
    }

    /// Lagrangian two-forms omega^A = -d theta^A.
    std::vector<TwoForm> omega() const {
        std::vector<TwoForm> out;
        for (auto& th : theta()) {
            TwoForm dth = d(th);
            TwoForm w(vel_);
            for (auto& [ij, v] : dth.entries()) w.add(ij.first, ij.second, -v);
            out.push_back(std::move(w));
        }
        return out;
    }

    /// Energy E_L = sum_{i,A} v^i_A dL/dv^i_A - L.
    RatExpr energy() const {
        RatExpr e = -L_;
        for (std::size_t i = 0; i < nf_; ++i)
            for (std::size_t A = 0; A < model_.k; ++A)
                e = e + velocity(i, A) * dLdv(i, A);
        return e;
    }

    /// The induced presymplectic system (velocity chart, omega^A, E_L).
    KPresymplecticSystem system() const {
        return KPresymplecticSystem{vel_, omega(), energy()};
    }

    /// Second-order condition rows (X_A)^{q^i} = v^i_A for the solver.
    std::vector<LinearRow> sopde_rows() const {
        std::vector<LinearRow> rows;
        std::size_t n = vel_->dim();
        for (std::size_t A = 0; A < model_.k; ++A)
            for (std::size_t i = 0; i < nf_; ++i) {
                LinearRow r;
                r.lhs.emplace_back(A * n + i, RatExpr(vel_->env(), Rational(1)));
                r.rhs = velocity(i, A);
                r.label = "second-order condition on " + vel_->coord_display(i) +
                          " in direction " + field_detail::direction_suffix(model_, A);
                rows.push_back(std::move(r));
            }
        return rows;
    }

    /// Hessian W_{(i,A),(j,B)} = d^2 L / dv^i_A dv^j_B, indexed by i*k + A.
    std::vector<std::vector<RatExpr>> hessian() const {
        std::size_t D = nf_ * model_.k;
        std::vector<std::vector<RatExpr>> w(D);
        for (std::size_t i = 0; i < nf_; ++i)
            for (std::size_t A = 0; A < model_.k; ++A) {
                RatExpr row = dLdv(i, A);
                for (std::size_t j = 0; j < nf_; ++j)
                    for (std::size_t B = 0; B < model_.k; ++B)
                        w[i * model_.k + A].push_back(
                            vel_->deriv(row, velocity_position(j, B)));
            }
        return w;
    }

    std::size_t hessian_rank() const { return generic_rank(hessian()); }

    /// Legendre map FL: velocity chart -> momentum chart.
    SmoothMap legendre() const {
        SmoothMap fl{vel_, mom_, {}};
        for (std::size_t i = 0; i < nf_; ++i) fl.comp.push_back(vel_->coordinate(i));
        for (std::size_t i = 0; i < nf_; ++i)
            for (std::size_t A = 0; A < model_.k; ++A) fl.comp.push_back(dLdv(i, A));
        return fl;
    }

    /// Canonical two-forms omega^A = sum_i dq^i ^ dp^i_A on the momentum chart.
    std::vector<TwoForm> canonical_forms() const {
        std::vector<TwoForm> out;
        for (std::size_t A = 0; A < model_.k; ++A) {
            TwoForm w(mom_);
            for (std::size_t i = 0; i < nf_; ++i)
                w.set(i, momentum_position(i, A), RatExpr(mom_->env(), Rational(1)));
            out.push_back(std::move(w));
        }
        return out;
    }

    /// Defining ideal of the Legendre-map image: adjoin the graph relations
    /// p^i_A = dL/dv^i_A on the joint chart and eliminate the velocities.
    /// Graph relations with a denominator not covered by the nonvanishing
    /// declarations are cleared (the ideal then cuts the Zariski closure);
    /// each clearance is reported through `warnings`.
    PrimaryConstraints primary_constraints(std::vector<std::string>* warnings = nullptr) const {
        std::vector<KPoly> gens;
        for (std::size_t i = 0; i < nf_; ++i)
            for (std::size_t A = 0; A < model_.k; ++A) {
                RatExpr rel = joint_->coordinate(joint_momentum_position(i, A)) -
                              dLdv(i, A).substitute({}, joint_->env());
                auto loc = joint_->ring()->localize(rel);
                if (!loc.leftover_den.is_constant() && warnings)
                    warnings->push_back(
                        "denominator cleared in Legendre relation for " +
                        joint_->coord_display(joint_momentum_position(i, A)));
                gens.push_back(std::move(loc.poly));
            }
        std::vector<std::size_t> cut;
        for (std::size_t i = 0; i < nf_ * model_.k; ++i) cut.push_back(nf_ + i);
        auto elim = PolyIdeal(joint_->ring(), std::move(gens)).eliminate(cut);

        PrimaryConstraints out{PolyIdeal(mom_->ring(), {}), {}, {}};
        std::vector<KPoly> mg;
        for (auto& g : elim) {
            RatExpr e = joint_->ring()->to_expr(g).substitute({}, mom_->env());
            mg.push_back(mom_->ring()->localize(e).poly);
            if (auto q = mom_->ring()->normalize_constraint(e, warnings)) {
                std::string s = print_poly(*q, *mom_->env());
                bool seen = false;
                for (auto& p : out.printed) seen = seen || p == s;
                if (!seen) {
                    out.polys.push_back(std::move(*q));
                    out.printed.push_back(std::move(s));
                }
            }
        }
        out.ideal = PolyIdeal(mom_->ring(), std::move(mg));
        return out;
    }

private:
    FieldModel model_;
    std::size_t nf_ = 0;
    ChartPtr vel_, mom_, joint_;
    RatExpr L_;
};

/// Euler-Lagrange residuals r_i = sum_A X_A(dL/dv^i_A) - dL/dq^i of a
/// concrete k-tuple of vector fields on the velocity chart.  For a
/// second-order solution of the field equations these vanish on the final
/// constraint submanifold.
inline std::vector<RatExpr> euler_lagrange_residual(const LagrangianSystem& ls,
                                                    const std::vector<VectorField>& X) {
    if (X.size() != ls.k()) throw input_error("euler_lagrange_residual: wrong number of fields");
    std::vector<RatExpr> out;
    for (std::size_t i = 0; i < ls.fields(); ++i) {
        RatExpr r = -ls.dLdq(i);
        for (std::size_t A = 0; A < ls.k(); ++A) r = r + apply(X[A], ls.dLdv(i, A));
        out.push_back(std::move(r));
    }
    return out;
}

/// Data for restricting the canonical Hamiltonian picture to the image of an
/// almost-regular Legendre map: a chart on the image submanifold, its
/// embedding into the momentum chart, and a section of the restricted
/// Legendre map (component expressions over the submanifold chart, listed in
/// target-chart coordinate order).
struct RestrictedInput {
    std::vector<symbol_info> coords;
    std::vector<std::string> nonvanishing;
    std::vector<std::string> embedding;
    std::vector<std::string> section;
};

/// The restricted Hamiltonian picture: submanifold chart, maps, restricted
/// Hamiltonian h0 with FL0* h0 = E_L, and the pulled-back presymplectic
/// system.  `check_failures` lists every exact identity that failed; an
/// empty list certifies the supplied embedding/section data.
struct RestrictedSystem {
    ChartPtr chart;
    SmoothMap embedding;   ///< chart -> momentum chart
    SmoothMap section;     ///< chart -> velocity chart
    SmoothMap projection;  ///< velocity chart -> chart (restricted Legendre map)
    RatExpr h0;
    KPresymplecticSystem system;
    std::vector<std::string> check_failures;
};

inline RestrictedSystem restricted_system(const LagrangianSystem& ls, const RestrictedInput& in) {
    const ChartPtr& vel = ls.velocity_chart();
    const ChartPtr& mom = ls.momentum_chart();
    ChartPtr p0 = Chart::create(in.coords, ls.model().params, in.nonvanishing, ls.model().limits);
    if (in.embedding.size() != mom->dim())
        throw input_error("embedding needs one component per momentum-chart coordinate");
    if (in.section.size() != vel->dim())
        throw input_error("section needs one component per velocity-chart coordinate");

    SmoothMap j0{p0, mom, {}};
    for (auto& text : in.embedding) j0.comp.push_back(p0->parse(text));
    SmoothMap sg{p0, vel, {}};
    for (auto& text : in.section) sg.comp.push_back(p0->parse(text));

    // The restricted Legendre map: each submanifold coordinate must appear as
    // the embedding component of some momentum-chart coordinate; its
    // projection component is that coordinate's Legendre component.
    SmoothMap fl0{vel, p0, {}};
    SmoothMap fl = ls.legendre();
    for (std::size_t y = 0; y < p0->dim(); ++y) {
        RatExpr yvar = p0->coordinate(y);
        std::size_t found = mom->dim();
        for (std::size_t c = 0; c < mom->dim(); ++c)
            if ((j0.comp[c] - yvar).is_zero_expr()) {
                found = c;
                break;
            }
        if (found == mom->dim())
            throw input_error("no momentum-chart coordinate restricts to " +
                              p0->coord_display(y));
        fl0.comp.push_back(fl.comp[found]);
    }

    std::vector<std::string> fails;
    for (std::size_t c = 0; c < mom->dim(); ++c) {
        if (!(fl0.pull(j0.comp[c]) - fl.comp[c]).is_zero_expr())
            fails.push_back("embedding after projection differs from the Legendre map at " +
                            mom->coord_display(c));
        if (!(sg.pull(fl.comp[c]) - j0.comp[c]).is_zero_expr())
            fails.push_back("Legendre map after section differs from the embedding at " +
                            mom->coord_display(c));
    }
    for (std::size_t y = 0; y < p0->dim(); ++y)
        if (!(sg.pull(fl0.comp[y]) - p0->coordinate(y)).is_zero_expr())
            fails.push_back("projection after section is not the identity at " +
                            p0->coord_display(y));

    RatExpr h0 = sg.pull(ls.energy());
    if (!(fl0.pull(h0) - ls.energy()).is_zero_expr())
        fails.push_back("restricted Hamiltonian does not pull back to the energy");

    std::vector<TwoForm> w0;
    for (auto& w : ls.canonical_forms()) w0.push_back(pullback(j0, w));

    RestrictedSystem out{p0,
                         std::move(j0),
                         std::move(sg),
                         std::move(fl0),
                         h0,
                         KPresymplecticSystem{p0, std::move(w0), h0},
                         std::move(fails)};
    return out;
}

} // namespace kps
