// Unified Lagrangian-Hamiltonian picture on the joint chart: coupling
// Hamiltonian, canonical presymplectic forms, the constraint run that
// recovers the Legendre graph and the second-order dynamics on it, and the
// outcome checks relating the unified run to both classical pictures.

#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "kps/constraint.hpp"
#include "kps/exterior.hpp"
#include "kps/field_theory.hpp"
#include "kps/skinner_rusk.hpp"

using namespace kps;

namespace {

bool expr_eq(const RatExpr& a, const RatExpr& b) { return (a - b).is_zero_expr(); }

const RatExpr* determination_of(const Family& fam, const std::string& name) {
    for (auto& [n, v] : fam.determinations)
        if (n == name) return &v;
    return nullptr;
}

/// Relativistic-string-type model: fields (q, e), two directions t/s,
/// L = q_vt^2/(2e) + m^2 e/2 - (tau/2) q_vs^2, with e nonvanishing.
LagrangianSystem string_model() {
    FieldModel m;
    m.fields = {"q", "e"};
    m.k = 2;
    m.directions = {"t", "s"};
    m.params = {"m", "tau"};
    m.nonvanishing = {"e"};
    return LagrangianSystem::create(m, "q_vt^2/(2*e) + (m^2*e)/2 - (tau/2)*q_vs^2");
}

/// Two-field model with a rank-one coupling Lagrangian
/// L = (q1_v2 + q2_v1)^2 / 2 on two directions.
LagrangianSystem em_model() {
    FieldModel m;
    m.fields = {"q1", "q2"};
    m.k = 2;
    return LagrangianSystem::create(m, "(q1_v2 + q2_v1)^2 / 2");
}

/// One degree of freedom, one direction, L = v^2/2.
LagrangianSystem free_particle() {
    FieldModel m;
    m.fields = {"q"};
    m.k = 1;
    return LagrangianSystem::create(m, "q_v1^2/2");
}

/// Pull the defining ideal of the final unified submanifold back to the
/// velocity chart through the Legendre-graph section.
PolyIdeal restricted_ideal(const LagrangianSystem& ls, const AlgorithmReport& rep) {
    SmoothMap emb = graph_embedding(ls);
    const RingPtr& vring = ls.velocity_chart()->ring();
    std::vector<KPoly> gens;
    for (auto& g : rep.final_ideal.gens()) {
        RatExpr e = emb.pull(ls.joint_chart()->ring()->to_expr(g));
        auto loc = vring->localize(e);
        if (!loc.poly.is_zero_poly()) gens.push_back(std::move(loc.poly));
    }
    return PolyIdeal(vring, std::move(gens));
}

/// Rows of the velocity-chart field equation sum_A i(X_A) omega_L^A - dE for
/// the (q, v)-part of an instantiated unified family, transported through the
/// Legendre-graph section.
std::vector<RatExpr> restricted_residual(const LagrangianSystem& ls, const UnifiedSystem& u,
                                         const AlgorithmReport& rep,
                                         const std::map<std::string, RatExpr>& bind) {
    SmoothMap emb = graph_embedding(ls);
    auto comps = instantiate(rep.family, bind, u.chart()->env());
    auto wl = ls.omega();
    RatExpr energy = ls.energy();
    const ChartPtr& vch = ls.velocity_chart();
    OneForm acc = OneForm::zero(vch);
    for (std::size_t A = 0; A < ls.k(); ++A) {
        VectorField X{vch, {}};
        for (std::size_t i = 0; i < vch->dim(); ++i) X.comp.push_back(emb.pull(comps[A][i]));
        OneForm t = interior(X, wl[A]);
        for (std::size_t j = 0; j < vch->dim(); ++j) acc.comp[j] = acc.comp[j] + t.comp[j];
    }
    std::vector<RatExpr> rows;
    for (std::size_t j = 0; j < vch->dim(); ++j)
        rows.push_back(acc.comp[j] - vch->deriv(energy, j));
    return rows;
}

void check_restriction(const LagrangianSystem& ls, const UnifiedSystem& u,
                       const AlgorithmReport& rep) {
    PolyIdeal ivel = restricted_ideal(ls, rep);
    const RingPtr& vring = ls.velocity_chart()->ring();

    std::vector<std::map<std::string, RatExpr>> binds;
    binds.push_back({});
    for (auto& name : rep.family.free_params) {
        std::map<std::string, RatExpr> b;
        b[name] = RatExpr(u.chart()->env(), Rational(1));
        binds.push_back(std::move(b));
    }
    std::map<std::string, RatExpr> mixed;
    long val = 2;
    for (auto& name : rep.family.free_params)
        mixed[name] = RatExpr(u.chart()->env(), Rational(val++)); // distinct nonzero values
    binds.push_back(std::move(mixed));

    for (auto& b : binds)
        for (auto& row : restricted_residual(ls, u, rep, b)) {
            auto loc = vring->localize(row);
            REQUIRE(loc.leftover_den.is_constant());
            CHECK(ivel.in_radical(loc.poly));
        }
}

} // namespace

TEST_CASE("free particle: unified picture in one dimension") {
    LagrangianSystem ls = free_particle();
    UnifiedSystem u = unified_system(ls);
    const ChartPtr& ch = u.chart();

    CHECK(ch == ls.joint_chart());
    CHECK(ch->dim() == 3);
    CHECK(expr_eq(u.coupling(), ch->parse("q_p1*q_v1")));
    CHECK(expr_eq(u.hamiltonian(), ch->parse("q_p1*q_v1 - q_v1^2/2")));
    CHECK(u.warnings().empty());

    auto ker = kernel_intersection_basis(u.system());
    REQUIRE(ker.size() == 1);
    CHECK(expr_eq(ker[0].comp[1], RatExpr(ch->env(), Rational(1))));
    CHECK(ker[0].comp[0].is_zero_expr());
    CHECK(ker[0].comp[2].is_zero_expr());

    // the kernel pairing reproduces the graph relation p - v
    auto pcf = primary_constraint_functions(u.system());
    REQUIRE(pcf.size() == 1);
    CHECK(u.graph_ideal().in_radical(ch->ring()->localize(pcf[0]).poly));

    RunOptions opt;
    opt.verify = true;
    auto rep = run_algorithm(u.system(), opt);
    REQUIRE(rep.status == RunStatus::stabilized);
    CHECK(rep.iterations == 2);
    REQUIRE(rep.generations.size() == 2);
    CHECK(rep.generations[0].printed == std::vector<std::string>{"q_v1 - q_p1"});
    CHECK(rep.generations[1].printed.empty());
    CHECK(rep.verification_failures.empty());

    // Z = v d/dq + 0 d/dv + 0 d/dp, with no arbitrariness left; components
    // come out reduced mod the final ideal, so the base one reads p
    const Family& fam = rep.family;
    CHECK(fam.free_params.empty());
    REQUIRE(fam.determinations.size() == 1);
    CHECK(fam.determinations[0].first == "lam1");
    CHECK(fam.determinations[0].second.is_zero_expr());
    CHECK(expr_eq(fam.comp[0][0], ch->coordinate(2).substitute({}, fam.env)));
    CHECK(fam.comp[0][1].is_zero_expr());
    CHECK(fam.comp[0][2].is_zero_expr());

    auto checks = u.verify_outcomes(rep);
    CHECK(checks.graph_generation);
    CHECK(checks.holonomy);
    CHECK(checks.trace_relation);
    CHECK(checks.tangency_identities);
    CHECK(checks.projection_matches_primary);
    CHECK(checks.all());
    CHECK(checks.diffs.empty());

    // the free function agrees with the member verification
    auto checks2 = verify_unified_outcomes(rep, ls);
    CHECK(checks2.all());
}

TEST_CASE("string-type model: unified run finds the graph, then the mass shell") {
    LagrangianSystem ls = string_model();
    UnifiedSystem u = unified_system(ls);
    const ChartPtr& ch = u.chart();

    CHECK(ch == ls.joint_chart());
    CHECK(u.warnings().empty());
    CHECK(expr_eq(u.hamiltonian(),
                  ch->parse("q_pt*q_vt + q_ps*q_vs + e_pt*e_vt + e_ps*e_vs "
                            "- (q_vt^2/(2*e) + (m^2*e)/2 - (tau/2)*q_vs^2)")));

    REQUIRE(u.system().omega.size() == 2);
    for (auto& w : u.system().omega) CHECK(is_closed(w));
    CHECK(expr_eq(u.system().omega[0].get(0, 6), RatExpr(ch->env(), Rational(1))));
    CHECK(expr_eq(u.system().omega[0].get(1, 8), RatExpr(ch->env(), Rational(1))));
    CHECK(expr_eq(u.system().omega[1].get(0, 7), RatExpr(ch->env(), Rational(1))));
    CHECK(expr_eq(u.system().omega[1].get(1, 9), RatExpr(ch->env(), Rational(1))));
    CHECK(kernel_intersection_basis(u.system()).size() == 4);

    RunOptions opt;
    opt.verify = true;
    auto rep = run_algorithm(u.system(), opt);
    REQUIRE(rep.status == RunStatus::stabilized);
    CHECK(rep.iterations == 3);
    REQUIRE(rep.generations.size() == 3);
    CHECK(rep.generations[0].printed ==
          std::vector<std::string>{"e*q_pt - q_vt", "tau*q_vs + q_ps", "e_pt", "e_ps"});
    // reduction mod the graph turns the velocity mass shell m^2 e^2 - q_vt^2
    // into its momentum form, the same one the restricted picture finds
    CHECK(rep.generations[1].printed == std::vector<std::string>{"q_pt^2 - m^2"});
    CHECK(rep.generations[2].printed.empty());
    CHECK(rep.verification_failures.empty());

    auto checks = u.verify_outcomes(rep);
    CHECK(checks.graph_generation);
    CHECK(checks.holonomy);
    CHECK(checks.trace_relation);
    CHECK(checks.tangency_identities);
    CHECK(checks.projection_matches_primary);
    CHECK(checks.diffs.empty());

    // the reduced family: base components are the velocities up to graph
    // relations, and the q-velocity components are driven by e_v * q_pt
    const Family& fam = rep.family;
    auto lift = [&](const char* text) { return ch->parse(text).substitute({}, fam.env); };
    CHECK(expr_eq(fam.comp[0][0], lift("q_vt")));
    CHECK(expr_eq(fam.comp[1][0], lift("-q_ps/tau")));
    CHECK(expr_eq(fam.comp[0][1], lift("e_vt")));
    CHECK(expr_eq(fam.comp[1][1], lift("e_vs")));
    CHECK(expr_eq(fam.comp[0][2], lift("e_vt*q_pt")));
    CHECK(expr_eq(fam.comp[1][2], lift("e_vs*q_pt")));
    auto lam = [&](const char* n) {
        return RatExpr::variable(fam.env, std::size_t(fam.env->require(n)));
    };
    for (std::size_t dir = 0; dir < 2; ++dir)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t A = 0; A < 2; ++A) {
                std::size_t pos = u.momentum_position(i, A);
                if (dir == 0 && pos == u.momentum_position(0, 1)) continue;
                CHECK(fam.comp[dir][pos].is_zero_expr());
            }
    // the one momentum component the algorithm cannot fix: (Z_t)^{q_ps}
    CHECK(expr_eq(fam.comp[0][u.momentum_position(0, 1)], lam("lam5")));

    CHECK(fam.free_params == std::vector<std::string>{"lam3", "lam4", "lam5", "lam9", "lam10"});
    CHECK(fam.determinations.size() == 9);
    const RatExpr* d1 = determination_of(fam, "lam1");
    REQUIRE(d1);
    CHECK(expr_eq(*d1, lift("e_vt*q_pt")));
    const RatExpr* d2 = determination_of(fam, "lam2");
    REQUIRE(d2);
    CHECK(expr_eq(*d2, lift("-1/tau") * lam("lam5")));

    // the mass-shell constraint in either presentation, and every graph
    // relation, cut the final locus
    CHECK(rep.final_ideal.in_radical(ch->ring()->localize(ch->parse("q_pt^2 - m^2")).poly));
    CHECK(rep.final_ideal.in_radical(ch->ring()->localize(ch->parse("m^2*e^2 - q_vt^2")).poly));
    for (auto& g : u.graph_relations()) CHECK(rep.final_ideal.in_radical(g));

    check_restriction(ls, u, rep);
}

TEST_CASE("coupling-type model: unified run stabilizes one step past the graph") {
    LagrangianSystem ls = em_model();
    UnifiedSystem u = unified_system(ls);
    const ChartPtr& ch = u.chart();

    CHECK(ch->dim() == 10);
    CHECK(u.warnings().empty());

    RunOptions opt;
    opt.verify = true;
    auto rep = run_algorithm(u.system(), opt);
    REQUIRE(rep.status == RunStatus::stabilized);
    CHECK(rep.iterations == 2);
    REQUIRE(rep.generations.size() == 2);
    CHECK(rep.generations[0].printed ==
          std::vector<std::string>{"q1_p1", "q1_v2 + q2_v1 - q1_p2", "q1_v2 + q2_v1 - q2_p1",
                                   "q2_p2"});
    CHECK(rep.generations[1].printed.empty());
    CHECK(rep.verification_failures.empty());

    auto checks = u.verify_outcomes(rep);
    CHECK(checks.graph_generation);
    CHECK(checks.holonomy);
    CHECK(checks.trace_relation);
    CHECK(checks.tangency_identities);
    CHECK(checks.projection_matches_primary);
    CHECK(checks.diffs.empty());

    const Family& fam = rep.family;
    CHECK(fam.free_params.size() == 6);
    CHECK(fam.determinations.size() == 8);

    // tangency to the graph ties the mixed velocity components together and
    // freezes every momentum component, identically in the free parameters
    for (std::size_t A = 0; A < 2; ++A) {
        CHECK((fam.comp[A][u.velocity_position(0, 1)] + fam.comp[A][u.velocity_position(1, 0)])
                  .is_zero_expr());
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t B = 0; B < 2; ++B)
                CHECK(fam.comp[A][u.momentum_position(i, B)].is_zero_expr());
    }

    // the velocity elimination of the first generation is the primary
    // momentum ideal, generated by q1_p1, q2_p2, q1_p2 - q2_p1
    PolyIdeal primary = u.primary_ideal_on_unified();
    CHECK(primary.in_radical(ch->ring()->localize(ch->parse("q1_p1")).poly));
    CHECK(primary.in_radical(ch->ring()->localize(ch->parse("q1_p2 - q2_p1")).poly));
    CHECK_FALSE(primary.in_radical(ch->ring()->localize(ch->parse("q1_p2")).poly));

    check_restriction(ls, u, rep);
}

TEST_CASE("unified kernel is the velocity distribution across dimensions") {
    for (std::size_t nf = 1; nf <= 3; ++nf)
        for (std::size_t k = 1; k <= 3; ++k) {
            FieldModel m;
            for (std::size_t i = 0; i < nf; ++i) m.fields.push_back("x" + std::to_string(i + 1));
            m.k = k;
            std::string L;
            for (std::size_t i = 0; i < nf; ++i)
                for (std::size_t A = 0; A < k; ++A) {
                    if (!L.empty()) L += " + ";
                    L += m.fields[i] + "_v" + std::to_string(A + 1) + "^2/2";
                }
            L += " + x1*" + m.fields[nf - 1] + "_v" + std::to_string(k); // mixed term
            LagrangianSystem ls = LagrangianSystem::create(m, L);
            UnifiedSystem u;                      // construction asserts the kernel
            REQUIRE_NOTHROW(u = unified_system(ls));
            CHECK(u.chart()->dim() == nf * (1 + 2 * k));
            CHECK(kernel_intersection_basis(u.system()).size() == nf * k);
        }
}

TEST_CASE("regular quadratic Lagrangians: unified runs stabilize on the graph") {
    std::mt19937 rng(20240817);
    for (int trial = 0; trial < 5; ++trial) {
        std::size_t nf = 1 + rng() % 2, k = 1 + rng() % 2;
        FieldModel m;
        for (std::size_t i = 0; i < nf; ++i) m.fields.push_back("x" + std::to_string(i + 1));
        m.k = k;
        std::string L;
        for (std::size_t i = 0; i < nf; ++i)
            for (std::size_t A = 0; A < k; ++A) {
                long c = long(rng() % 3) + 1;
                if (rng() % 2) c = -c;
                if (!L.empty()) L += " + ";
                L += "(" + std::to_string(c) + "/2)*" + m.fields[i] + "_v" +
                     std::to_string(A + 1) + "^2";
            }
        // a potential keeps the run nontrivial without spoiling regularity
        for (std::size_t i = 0; i < nf; ++i) {
            long c = long(rng() % 5) - 2;
            if (c == 0) continue;
            L += " + (" + std::to_string(c) + ")*" + m.fields[i] + "^" +
                 std::to_string(1 + rng() % 2);
        }
        LagrangianSystem ls = LagrangianSystem::create(m, L);
        CHECK(ls.hessian_rank() == nf * k);

        UnifiedSystem u = unified_system(ls);
        RunOptions opt;
        opt.verify = true;
        auto rep = run_algorithm(u.system(), opt);
        REQUIRE(rep.status == RunStatus::stabilized);
        CHECK(rep.iterations == 2);
        REQUIRE(rep.generations.size() == 2);
        CHECK(rep.generations[0].printed.size() == nf * k);
        CHECK(rep.generations[1].printed.empty());
        CHECK(rep.verification_failures.empty());

        // no secondary constraints: the final locus is exactly the graph
        CHECK(ideals_equal(rep.final_ideal, u.graph_ideal()));
        CHECK(rep.family.free_params.size() == nf * (k * k - 1));

        auto checks = u.verify_outcomes(rep);
        CHECK(checks.all());
        CHECK(checks.diffs.empty());

        check_restriction(ls, u, rep);
    }
}

TEST_CASE("outcome checks flag doctored reports") {
    LagrangianSystem ls = free_particle();
    UnifiedSystem u = unified_system(ls);
    RunOptions opt;
    auto rep = run_algorithm(u.system(), opt);
    REQUIRE(rep.status == RunStatus::stabilized);
    REQUIRE(u.verify_outcomes(rep).all());

    SECTION("missing first generation") {
        AlgorithmReport bad = rep;
        bad.generations.clear();
        auto checks = u.verify_outcomes(bad);
        CHECK_FALSE(checks.graph_generation);
        // both sides of the projection check are trivial for a regular
        // Lagrangian, so that one still holds
        CHECK(checks.projection_matches_primary);
        CHECK_FALSE(checks.all_four());
        CHECK_FALSE(checks.diffs.empty());
    }

    SECTION("tampered base component breaks holonomy only") {
        AlgorithmReport bad = rep;
        bad.family.comp[0][0] =
            bad.family.comp[0][0] + RatExpr(bad.family.env, Rational(1));
        auto checks = u.verify_outcomes(bad);
        CHECK_FALSE(checks.holonomy);
        CHECK(checks.graph_generation);
        CHECK(checks.trace_relation);
        CHECK(checks.tangency_identities);
        bool mentions = false;
        for (auto& d : checks.diffs) mentions = mentions || d.find("holonomy") != std::string::npos;
        CHECK(mentions);
    }

    SECTION("tampered momentum component breaks trace and chain rule") {
        AlgorithmReport bad = rep;
        bad.family.comp[0][2] =
            bad.family.comp[0][2] + RatExpr(bad.family.env, Rational(1));
        auto checks = u.verify_outcomes(bad);
        CHECK(checks.holonomy);
        CHECK_FALSE(checks.trace_relation);
        CHECK_FALSE(checks.tangency_identities);
    }
}

TEST_CASE("second-order rows are a no-op for unified systems") {
    for (int which = 0; which < 2; ++which) {
        LagrangianSystem ls = which == 0 ? free_particle() : string_model();
        UnifiedSystem u = unified_system(ls);
        CHECK(u.sopde_rows().size() == ls.fields() * ls.k());

        RunOptions plain;
        plain.verify = true;
        auto rep_plain = run_algorithm(u.system(), plain);

        RunOptions withrows = plain;
        withrows.extra_rows = u.sopde_rows();
        auto rep_rows = run_algorithm(u.system(), withrows);

        REQUIRE(rep_plain.status == RunStatus::stabilized);
        REQUIRE(rep_rows.status == RunStatus::stabilized);
        CHECK(rep_rows.verification_failures.empty());
        CHECK(rep_plain.iterations == rep_rows.iterations);
        REQUIRE(rep_plain.generations.size() == rep_rows.generations.size());
        for (std::size_t g = 0; g < rep_plain.generations.size(); ++g)
            CHECK(rep_plain.generations[g].printed == rep_rows.generations[g].printed);
        CHECK(rep_plain.family.free_params == rep_rows.family.free_params);
        REQUIRE(rep_plain.family.determinations.size() == rep_rows.family.determinations.size());
        for (std::size_t d = 0; d < rep_plain.family.determinations.size(); ++d)
            CHECK(rep_plain.family.determinations[d].first ==
                  rep_rows.family.determinations[d].first);
        for (std::size_t A = 0; A < ls.k(); ++A)
            for (std::size_t i = 0; i < u.chart()->dim(); ++i)
                CHECK((rep_plain.family.comp[A][i] -
                       rep_rows.family.comp[A][i].substitute({}, rep_plain.family.env))
                          .is_zero_expr());
    }
}

TEST_CASE("graph embedding restricts unified functions to the Legendre graph") {
    LagrangianSystem ls = string_model();
    SmoothMap emb = graph_embedding(ls);
    CHECK(emb.src == ls.velocity_chart());
    CHECK(emb.dst == ls.joint_chart());
    REQUIRE(emb.comp.size() == 10);

    // coordinates pull back to themselves, momenta to dL/dv
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(expr_eq(emb.pull(ls.joint_chart()->coordinate(i)),
                      ls.velocity_chart()->coordinate(i)));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t A = 0; A < 2; ++A)
            CHECK(expr_eq(
                emb.pull(ls.joint_chart()->coordinate(6 + i * 2 + A)), ls.dLdv(i, A)));

    // every graph relation dies on the graph
    UnifiedSystem u = unified_system(ls);
    for (auto& g : u.graph_relations())
        CHECK(emb.pull(ls.joint_chart()->ring()->to_expr(g)).is_zero_expr());
}
