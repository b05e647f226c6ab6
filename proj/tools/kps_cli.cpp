// kps — run the k-presymplectic constraint algorithm on a .kps system file.
//
// Subcommands:
//   run         parse, build, run; text report to stdout, optional JSON
//   check       re-run a system and compare against a stored JSON report
//   print-forms parse and build only; dump chart, forms, Hamiltonian, kernel
//
// Exit codes: 0 stabilized, 2 empty final manifold, 3 iteration cap reached,
// 4 undecidable pivot, 1 bad input or I/O.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kps/report.hpp"

namespace {

struct Opts {
    std::string input, json_path;
    bool sopde = false, verify = false, quiet = false;
    std::size_t max_iter = 0; ///< 0: take the value from the file
};

kps::RunOptions run_options(const kps::CompiledSystem& cs, const Opts& o) {
    kps::RunOptions opt;
    opt.max_iterations = o.max_iter ? o.max_iter : cs.spec.max_iterations;
    opt.verify = o.verify || cs.spec.verify;
    if (o.sopde || cs.spec.sopde) {
        if (cs.sopde_rows.empty())
            throw kps::input_error("the sopde option needs a Lagrangian-side mode");
        opt.extra_rows = cs.sopde_rows;
    }
    return opt;
}

int do_run(const Opts& o) {
    kps::CompiledSystem cs = kps::compile_spec_file(o.input);
    kps::AlgorithmReport rep = kps::run_algorithm(cs.system, run_options(cs, o));
    if (!o.quiet) std::cout << kps::text_report(cs, rep);
    if (!o.json_path.empty()) {
        std::ofstream f(o.json_path);
        if (!f) throw kps::input_error("cannot write " + o.json_path);
        f << kps::json_report(rep).dump(2) << "\n";
    }
    return kps::exit_code_of(rep.status);
}

int do_check(const Opts& o) {
    kps::CompiledSystem cs = kps::compile_spec_file(o.input);
    std::ifstream f(o.json_path);
    if (!f) throw kps::input_error("cannot open " + o.json_path);
    nlohmann::json stored = nlohmann::json::parse(f);

    kps::AlgorithmReport rep = kps::run_algorithm(cs.system, run_options(cs, o));
    nlohmann::json fresh = kps::json_report(rep);

    std::vector<std::string> diffs;
    auto compare = [&](const char* key, const nlohmann::json& a, const nlohmann::json& b) {
        if (a != b) diffs.push_back(std::string(key) + ": stored " + a.dump() + ", fresh " + b.dump());
    };
    compare("status", stored.value("status", nlohmann::json()), fresh["status"]);
    compare("generations", stored.value("generations", nlohmann::json::array()),
            fresh["generations"]);
    compare("family.parameters",
            stored.contains("family") ? stored["family"].value("parameters", nlohmann::json::array())
                                      : nlohmann::json::array(),
            fresh["family"]["parameters"]);

    if (diffs.empty()) {
        if (!o.quiet)
            std::cout << "check passed: status " << fresh["status"].get<std::string>() << ", "
                      << fresh["generations"].size() << " generation(s), "
                      << fresh["family"]["parameters"].size() << " free function(s)\n";
        return 0;
    }
    for (auto& d : diffs) std::cerr << "mismatch: " << d << "\n";
    return 1;
}

int do_print_forms(const Opts& o) {
    kps::CompiledSystem cs = kps::compile_spec_file(o.input);
    std::cout << kps::forms_report(cs);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"k-presymplectic constraint algorithm"};
    app.require_subcommand(1);

    Opts o;
    auto add_common = [&](CLI::App* sub, bool with_json, bool json_required) {
        sub->add_option("--input", o.input, "system description (.kps file)")->required();
        if (with_json) {
            auto* opt = sub->add_option("--json", o.json_path, "JSON report path");
            if (json_required) opt->required();
        }
        sub->add_flag("--sopde", o.sopde, "append second-order conditions");
        sub->add_flag("--verify", o.verify, "re-check the field equation on the result");
        sub->add_flag("--quiet", o.quiet, "suppress the text report");
        sub->add_option("--max-iter", o.max_iter, "iteration cap")->check(CLI::PositiveNumber);
    };

    CLI::App* run = app.add_subcommand("run", "run the constraint algorithm");
    add_common(run, true, false);
    CLI::App* check = app.add_subcommand("check", "compare a stored JSON report with a fresh run");
    add_common(check, true, true);
    CLI::App* forms = app.add_subcommand("print-forms", "show the compiled system");
    add_common(forms, false, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return do_run(o);
        if (check->parsed()) return do_check(o);
        return do_print_forms(o);
    } catch (const kps::undecidable_pivot_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const kps::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
