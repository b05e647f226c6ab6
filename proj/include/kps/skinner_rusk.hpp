#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kps/constraint.hpp"
#include "kps/field_theory.hpp"

namespace kps {

/// Unified Lagrangian-Hamiltonian picture on the joint chart
/// (q^i, v^i_A, p^i_A): presymplectic forms Omega^A = sum_i dq^i /\ dp^i_A
/// and Hamiltonian H = C - L, where C = sum_{i,A} p^i_A v^i_A is the coupling
/// function.  Running the constraint algorithm on this system recovers the
/// graph of the Legendre map as the first constraint generation and
/// second-order dynamics on top of it; verify_outcomes checks exactly that
/// on a finished report.
class UnifiedSystem {
public:
    /// Outcome checks for a constraint-algorithm report of a unified system.
    /// The first four are structural claims about any unified run; the fifth
    /// relates it to the Hamiltonian picture.  Mod-ideal identities are
    /// checked for the whole family: at zero and at each unit value of the
    /// surviving free parameters (every identity is affine in them).
    struct Checks {
        /// Generation 1 equals the Legendre-graph ideal <p^i_A - dL/dv^i_A>.
        bool graph_generation = false;
        /// (Z_A)^{q^i} == v^i_A mod the final ideal (second-order base flow).
        bool holonomy = false;
        /// sum_B (Z_B)^{p^i_B} == dL/dq^i mod the final ideal.
        bool trace_relation = false;
        /// Each momentum component follows the chain rule through the graph:
        /// (Z_A)^{p^j_B} == sum_i d2L/dv^j_B dq^i v^i_A
        ///                + sum_{i,C} d2L/dv^j_B dv^i_C (Z_A)^{v^i_C}.
        bool tangency_identities = false;
        /// Eliminating the velocities from generation 1 yields the primary
        /// constraint ideal of the Hamiltonian picture.
        bool projection_matches_primary = false;

        std::vector<std::string> diffs; ///< human-readable failure details

        bool all_four() const {
            return graph_generation && holonomy && trace_relation && tangency_identities;
        }
        bool all() const { return all_four() && projection_matches_primary; }
    };

    static UnifiedSystem create(const LagrangianSystem& ls) {
        UnifiedSystem u;
        u.model_ = ls.model();
        u.nf_ = ls.fields();
        u.k_ = ls.k();
        u.chart_ = ls.joint_chart();
        const EnvPtr& env = u.chart_->env();
        const RingPtr& ring = u.chart_->ring();

        std::vector<TwoForm> forms;
        for (std::size_t A = 0; A < u.k_; ++A) {
            TwoForm w(u.chart_);
            for (std::size_t i = 0; i < u.nf_; ++i)
                w.set(u.base_position(i), u.momentum_position(i, A), RatExpr(env, Rational(1)));
            forms.push_back(std::move(w));
        }

        RatExpr L = ls.lagrangian().substitute({}, env);
        u.coupling_ = RatExpr(env, Rational(0));
        for (std::size_t i = 0; i < u.nf_; ++i)
            for (std::size_t A = 0; A < u.k_; ++A)
                u.coupling_ = u.coupling_ + u.chart_->coordinate(u.momentum_position(i, A)) *
                                                u.chart_->coordinate(u.velocity_position(i, A));
        u.sys_ = KPresymplecticSystem{u.chart_, std::move(forms), u.coupling_ - L};

        for (std::size_t i = 0; i < u.nf_; ++i) u.dLdq_.push_back(ls.dLdq(i).substitute({}, env));
        for (std::size_t i = 0; i < u.nf_; ++i)
            for (std::size_t A = 0; A < u.k_; ++A)
                u.dLdv_.push_back(ls.dLdv(i, A).substitute({}, env));

        for (std::size_t i = 0; i < u.nf_; ++i)
            for (std::size_t A = 0; A < u.k_; ++A) {
                RatExpr rel = u.chart_->coordinate(u.momentum_position(i, A)) -
                              u.dLdv_[i * u.k_ + A];
                auto loc = ring->localize(rel);
                if (!loc.leftover_den.is_constant())
                    u.warnings_.push_back("denominator cleared in graph relation for " +
                                          u.chart_->coord_display(u.momentum_position(i, A)));
                u.graph_.push_back(std::move(loc.poly));
            }

        auto pc = ls.primary_constraints(&u.warnings_);
        for (auto& g : pc.ideal.gens()) {
            RatExpr e = ls.momentum_chart()->ring()->to_expr(g).substitute({}, env);
            u.primary_on_unified_.push_back(ring->localize(e).poly);
        }

        // The common kernel of the forms must be the vertical velocity
        // distribution span{d/dv^i_A}; anything else means the construction
        // above is inconsistent.
        QuotCtx ctx(u.chart_->zero_ideal());
        std::vector<std::vector<QuotElem>> ker;
        for (auto& Z : kernel_intersection_basis(u.sys_)) {
            std::vector<QuotElem> row;
            for (auto& c : Z.comp) row.push_back(q_from_expr(ctx, c, nullptr));
            ker.push_back(std::move(row));
        }
        std::vector<std::vector<QuotElem>> vert;
        for (std::size_t t = 0; t < u.nf_ * u.k_; ++t) {
            std::vector<QuotElem> row(u.chart_->dim());
            row[u.nf_ + t] = QuotElem::one();
            vert.push_back(std::move(row));
        }
        if (ker.size() != u.nf_ * u.k_ || !spans_equal(ctx, ker, vert))
            throw error("unified system: kernel of the presymplectic forms is not "
                        "the vertical velocity distribution");
        return u;
    }

    const ChartPtr& chart() const { return chart_; }
    const KPresymplecticSystem& system() const { return sys_; }
    const RatExpr& hamiltonian() const { return sys_.H; }
    const RatExpr& coupling() const { return coupling_; }
    std::size_t k() const { return k_; }
    std::size_t fields() const { return nf_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    std::size_t base_position(std::size_t i) const { return i; }
    std::size_t velocity_position(std::size_t i, std::size_t A) const {
        return nf_ + i * k_ + A;
    }
    std::size_t momentum_position(std::size_t i, std::size_t A) const {
        return nf_ + nf_ * k_ + i * k_ + A;
    }

    /// Localized graph relations p^i_A - dL/dv^i_A on the unified ring.
    const std::vector<KPoly>& graph_relations() const { return graph_; }
    PolyIdeal graph_ideal() const { return PolyIdeal(chart_->ring(), graph_); }

    /// Primary constraint ideal of the Hamiltonian picture, transported to
    /// the unified ring by matching coordinate names.
    PolyIdeal primary_ideal_on_unified() const {
        return PolyIdeal(chart_->ring(), primary_on_unified_);
    }

    /// Second-order rows (Z_A)^{q^i} = v^i_A.  The field equation of the
    /// unified system already implies them, so appending these rows never
    /// changes the outcome of a run; they exist so that callers can treat
    /// every pipeline uniformly.
    std::vector<LinearRow> sopde_rows() const {
        std::vector<LinearRow> rows;
        std::size_t N = chart_->dim();
        for (std::size_t i = 0; i < nf_; ++i)
            for (std::size_t A = 0; A < k_; ++A) {
                LinearRow r;
                r.lhs.emplace_back(A * N + base_position(i), RatExpr(chart_->env(), Rational(1)));
                r.rhs = chart_->coordinate(velocity_position(i, A));
                r.label = "second-order condition on " + chart_->coord_display(i) +
                          " in direction " + field_detail::direction_suffix(model_, A);
                rows.push_back(std::move(r));
            }
        return rows;
    }

    Checks verify_outcomes(const AlgorithmReport& rep) const {
        Checks c;
        const RingPtr& ring = chart_->ring();

        std::vector<KPoly> gen1;
        if (!rep.generations.empty())
            for (auto& p : rep.generations[0].polys) gen1.push_back(ring->poly_from(p));
        c.graph_generation = ideals_equal(PolyIdeal(ring, gen1), graph_ideal());
        if (!c.graph_generation)
            c.diffs.push_back("first constraint generation differs from the graph ideal");

        c.projection_matches_primary =
            ideals_equal(PolyIdeal(ring, PolyIdeal(ring, gen1).eliminate(velocity_ring_positions())),
                         primary_ideal_on_unified());
        if (!c.projection_matches_primary)
            c.diffs.push_back("velocity elimination of generation 1 differs from the "
                              "primary constraint ideal");

        // A leftover denominator made of parameters alone is a unit of the
        // coefficient field and cannot affect membership.
        auto unit_den = [&](const QPoly& den) {
            if (den.is_constant()) return true;
            for (auto& [m, c] : den.terms())
                for (std::size_t i = 0; i < m.size(); ++i)
                    if (m[i] != 0 && chart_->env()->at(i).kind != symbol_kind::parameter)
                        return false;
            return true;
        };
        auto in_final = [&](const RatExpr& e) {
            auto loc = ring->localize(e);
            return unit_den(loc.leftover_den) && rep.final_ideal.in_radical(loc.poly);
        };

        // Every identity below is affine in the free parameters, so checking
        // at the zero binding and at each unit one-hot binding is exhaustive.
        std::vector<std::pair<std::string, std::map<std::string, RatExpr>>> bindings;
        bindings.emplace_back("all parameters zero", std::map<std::string, RatExpr>{});
        for (auto& name : rep.family.free_params) {
            std::map<std::string, RatExpr> b;
            b[name] = RatExpr(chart_->env(), Rational(1));
            bindings.emplace_back(name + " = 1", std::move(b));
        }

        c.holonomy = c.trace_relation = c.tangency_identities = true;
        for (auto& [label, b] : bindings) {
            auto comp = instantiate(rep.family, b, chart_->env());

            for (std::size_t A = 0; A < k_; ++A)
                for (std::size_t i = 0; i < nf_; ++i) {
                    RatExpr r = comp[A][base_position(i)] -
                                chart_->coordinate(velocity_position(i, A));
                    if (!in_final(r)) {
                        c.holonomy = false;
                        c.diffs.push_back("holonomy fails for " + chart_->coord_display(i) +
                                          ", direction " +
                                          field_detail::direction_suffix(model_, A) + " (" +
                                          label + "): " + print_expr(r));
                    }
                }

            for (std::size_t i = 0; i < nf_; ++i) {
                RatExpr r = -dLdq_[i];
                for (std::size_t B = 0; B < k_; ++B) r = r + comp[B][momentum_position(i, B)];
                if (!in_final(r)) {
                    c.trace_relation = false;
                    c.diffs.push_back("trace relation fails for " + chart_->coord_display(i) +
                                      " (" + label + "): " + print_expr(r));
                }
            }

            for (std::size_t A = 0; A < k_; ++A)
                for (std::size_t j = 0; j < nf_; ++j)
                    for (std::size_t B = 0; B < k_; ++B) {
                        const RatExpr& w = dLdv_[j * k_ + B];
                        RatExpr r = comp[A][momentum_position(j, B)];
                        for (std::size_t i = 0; i < nf_; ++i)
                            r = r - chart_->deriv(w, base_position(i)) *
                                        chart_->coordinate(velocity_position(i, A));
                        for (std::size_t i = 0; i < nf_; ++i)
                            for (std::size_t C = 0; C < k_; ++C)
                                r = r - chart_->deriv(w, velocity_position(i, C)) *
                                            comp[A][velocity_position(i, C)];
                        if (!in_final(r)) {
                            c.tangency_identities = false;
                            c.diffs.push_back(
                                "momentum component " +
                                chart_->coord_display(momentum_position(j, B)) +
                                " of direction " + field_detail::direction_suffix(model_, A) +
                                " breaks the chain rule (" + label + "): " + print_expr(r));
                        }
                    }
        }
        return c;
    }

    /// Ring positions of the velocity coordinates, the elimination cut that
    /// realizes the projection onto the momentum variables.
    std::vector<std::size_t> velocity_ring_positions() const {
        std::vector<std::size_t> cut;
        for (std::size_t t = 0; t < nf_ * k_; ++t) cut.push_back(nf_ + t);
        return cut;
    }

private:
    FieldModel model_;
    std::size_t nf_ = 0, k_ = 0;
    ChartPtr chart_;
    KPresymplecticSystem sys_;
    RatExpr coupling_;
    std::vector<RatExpr> dLdq_, dLdv_;
    std::vector<KPoly> graph_, primary_on_unified_;
    std::vector<std::string> warnings_;
};

inline UnifiedSystem unified_system(const LagrangianSystem& ls) {
    return UnifiedSystem::create(ls);
}

inline UnifiedSystem::Checks verify_unified_outcomes(const AlgorithmReport& rep,
                                                     const LagrangianSystem& ls) {
    return UnifiedSystem::create(ls).verify_outcomes(rep);
}

/// Graph of the Legendre map as a section of the projection onto the
/// velocity variables: (q, v) |-> (q, v, dL/dv).  Pulling a unified-chart
/// function back through this map restricts it to the first constraint
/// submanifold of the unified picture.
inline SmoothMap graph_embedding(const LagrangianSystem& ls) {
    SmoothMap g{ls.velocity_chart(), ls.joint_chart(), {}};
    for (std::size_t i = 0; i < ls.fields(); ++i)
        g.comp.push_back(ls.velocity_chart()->coordinate(i));
    for (std::size_t t = 0; t < ls.fields() * ls.k(); ++t)
        g.comp.push_back(ls.velocity_chart()->coordinate(ls.fields() + t));
    for (std::size_t i = 0; i < ls.fields(); ++i)
        for (std::size_t A = 0; A < ls.k(); ++A) g.comp.push_back(ls.dLdv(i, A));
    return g;
}

} // namespace kps
