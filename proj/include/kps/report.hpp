#pragma once

// Reporting for constraint-algorithm runs: a human-readable text report and
// a machine-readable JSON document with a stable schema.
//
// JSON schema (documented in full under docs/):
//   {
//     "status": "stabilized" | "empty" | "max_iterations" | "undecidable_pivot",
//     "generations": [ { "constraints": [ "expr", ... ] }, ... ],
//     "family": {
//       "particular":    [ [ "expr", ... n ], ... k ],
//       "homogeneous":   [ { "parameter": "lam1",
//                            "components": [ [ "expr", ... n ], ... k ] }, ... ],
//       "parameters":    [ "lam1", ... ],
//       "determinations": { "lam4": "expr", ... }
//     },
//     "warnings": [ "text", ... ]
//   }
// Verification failures and pivot notes are folded into `warnings` with a
// distinguishing prefix.

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kps/constraint.hpp"
#include "kps/printer.hpp"
#include "kps/specfile.hpp"

namespace kps {

/// Process exit code for a finished run.
inline int exit_code_of(RunStatus s) {
    switch (s) {
    case RunStatus::stabilized: return 0;
    case RunStatus::empty: return 2;
    case RunStatus::max_iterations: return 3;
    case RunStatus::undecidable_pivot: return 4;
    }
    return 1;
}

namespace report_detail {

/// "(expr) d/dx + (expr) d/dy" with zero components skipped.
inline std::string field_text(const ChartPtr& ch, const std::vector<RatExpr>& comp) {
    std::string s;
    for (std::size_t i = 0; i < comp.size() && i < ch->dim(); ++i) {
        if (comp[i].is_zero_expr()) continue;
        if (!s.empty()) s += " + ";
        s += "(" + print_expr(comp[i]) + ") d/d" + ch->coord_display(i);
    }
    return s.empty() ? "0" : s;
}

} // namespace report_detail

/// Machine-readable report with the documented stable schema.
inline nlohmann::json json_report(const AlgorithmReport& rep) {
    nlohmann::json j;
    j["status"] = status_name(rep.status);
    j["generations"] = nlohmann::json::array();
    for (auto& g : rep.generations)
        j["generations"].push_back(nlohmann::json{{"constraints", g.printed}});
    nlohmann::json fam;
    fam["particular"] = nlohmann::json::array();
    for (auto& row : rep.family.particular) {
        nlohmann::json r = nlohmann::json::array();
        for (auto& e : row) r.push_back(print_expr(e));
        fam["particular"].push_back(std::move(r));
    }
    fam["homogeneous"] = nlohmann::json::array();
    for (auto& [name, comp] : rep.family.homogeneous) {
        nlohmann::json r = nlohmann::json::array();
        for (auto& row : comp) {
            nlohmann::json rr = nlohmann::json::array();
            for (auto& e : row) rr.push_back(print_expr(e));
            r.push_back(std::move(rr));
        }
        fam["homogeneous"].push_back(nlohmann::json{{"parameter", name}, {"components", r}});
    }
    fam["parameters"] = rep.family.free_params;
    fam["determinations"] = nlohmann::json::object();
    for (auto& [name, v] : rep.family.determinations)
        fam["determinations"][name] = print_expr(v);
    j["family"] = std::move(fam);
    j["warnings"] = nlohmann::json::array();
    for (auto& w : rep.warnings) j["warnings"].push_back(w);
    for (auto& w : rep.verification_failures)
        j["warnings"].push_back("verification: " + w);
    if (!rep.pivot_note.empty()) j["warnings"].push_back("pivot: " + rep.pivot_note);
    return j;
}

/// Human-readable report: the system, its kernel, every constraint
/// generation, the solution family with its named free functions, and all
/// warnings.
inline std::string text_report(const CompiledSystem& cs, const AlgorithmReport& rep) {
    using report_detail::field_text;
    std::ostringstream out;
    const ChartPtr& ch = cs.system.chart;
    const char* mode = cs.spec.mode == SystemSpec::Mode::hamiltonian
                           ? (cs.restricted ? "restricted hamiltonian" : "hamiltonian")
                           : cs.spec.mode == SystemSpec::Mode::lagrangian ? "lagrangian"
                                                                          : "skinner-rusk";
    out << "k-presymplectic constraint run (" << mode << ", k = " << cs.system.k() << ")\n";
    out << "chart:";
    for (std::size_t i = 0; i < ch->dim(); ++i) out << " " << ch->coord_display(i);
    out << "\n";
    auto kernel = kernel_intersection_basis(cs.system);
    out << "kernel of the presymplectic forms (" << kernel.size() << " fields):\n";
    if (kernel.empty()) out << "  trivial\n";
    for (auto& Z : kernel) out << "  " << field_text(ch, Z.comp) << "\n";

    for (std::size_t g = 0; g < rep.generations.size(); ++g) {
        out << "generation " << (g + 1) << ":\n";
        if (rep.generations[g].printed.empty()) out << "  no new constraints\n";
        for (auto& c : rep.generations[g].printed) out << "  " << c << " = 0\n";
    }
    if (rep.generations.empty()) out << "no constraints: the whole chart supports solutions\n";

    const Family& fam = rep.family;
    if (!fam.comp.empty()) {
        out << "solution family:\n";
        for (std::size_t A = 0; A < fam.comp.size(); ++A)
            out << "  X_" << (A + 1) << " = " << field_text(ch, fam.comp[A]) << "\n";
        if (fam.free_params.empty()) out << "  free functions: none\n";
        else {
            out << "  free functions:";
            for (auto& p : fam.free_params) out << " " << p;
            out << "\n";
        }
        for (auto& [name, v] : fam.determinations)
            out << "  determined: " << name << " = " << print_expr(v) << "\n";
    }

    for (auto& w : cs.warnings) out << "warning: " << w << "\n";
    for (auto& w : rep.warnings) out << "warning: " << w << "\n";
    for (auto& w : rep.verification_failures) out << "verification failure: " << w << "\n";
    if (!rep.pivot_note.empty()) out << "pivot note: " << rep.pivot_note << "\n";
    out << "status: " << status_name(rep.status) << " after " << rep.iterations
        << (rep.iterations == 1 ? " iteration" : " iterations") << "\n";
    return out.str();
}

/// Forms-and-data dump for the `print-forms` subcommand.
inline std::string forms_report(const CompiledSystem& cs) {
    std::ostringstream out;
    const ChartPtr& ch = cs.system.chart;
    out << "chart:";
    for (std::size_t i = 0; i < ch->dim(); ++i) out << " " << ch->coord_display(i);
    out << "\n";
    if (!cs.spec.parameters.empty()) {
        out << "parameters:";
        for (auto& p : cs.spec.parameters) out << " " << p;
        out << "\n";
    }
    for (std::size_t A = 0; A < cs.system.omega.size(); ++A) {
        out << "omega" << (A + 1) << " =";
        bool first = true;
        for (auto& [ij, v] : cs.system.omega[A].entries()) {
            if (v.is_zero_expr()) continue;
            out << (first ? " " : " + ") << "(" << print_expr(v) << ") d"
                << ch->coord_display(ij.first) << " ^ d" << ch->coord_display(ij.second);
            first = false;
        }
        if (first) out << " 0";
        out << "\n";
    }
    out << "H = " << print_expr(cs.system.H) << "\n";
    auto kernel = kernel_intersection_basis(cs.system);
    out << "kernel (" << kernel.size() << " fields):\n";
    if (kernel.empty()) out << "  trivial\n";
    for (auto& Z : kernel) out << "  " << report_detail::field_text(ch, Z.comp) << "\n";
    auto prim = primary_constraint_functions(cs.system);
    out << "primary constraint functions:\n";
    if (prim.empty()) out << "  none\n";
    for (auto& f : prim) out << "  " << print_expr(f) << "\n";
    return out.str();
}

} // namespace kps
