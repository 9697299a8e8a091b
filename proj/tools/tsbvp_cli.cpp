// tsbvp command-line front end: verify | solve | iterate | example.
//
// Exit codes: 0 pass / solutions found, 1 hypothesis violation,
// 2 parse or config error, 3 no solutions found (or iteration did not
// converge).

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tsbvp/problem_io.hpp"
#include "tsbvp/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitHypothesisFail = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNoSolutions = 3;

struct OutputOptions {
    std::string format = "human";
    std::string out_path;
};

void emit(const tsbvp::Json& report, const OutputOptions& opts) {
    std::string text;
    if (opts.format == "machine") {
        text = tsbvp::machine_text(report);
    } else {
        std::ostringstream os;
        tsbvp::render_human(report, os);
        text = os.str();
    }
    if (opts.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(opts.out_path, std::ios::binary);
    if (!out)
        throw tsbvp::ConfigError("cannot write report to '" + opts.out_path + "'");
    out << text;
}

struct VerifyOutcome {
    tsbvp::Json report;
    bool pass = false;
};

VerifyOutcome run_verify(const tsbvp::LoadedProblem& lp) {
    const tsbvp::BvpProblem& p = lp.problem;
    const auto growth = tsbvp::check_growth(*p.scale, p.order, p.f, p.g, *p.envelope, lp.a1_check);
    const bool radii_pass = tsbvp::check_radii(*p.params);
    const auto bounds = tsbvp::hypothesis_report(p);

    VerifyOutcome outcome;
    outcome.report["kind"] = "verify";
    outcome.report["problem"] = tsbvp::problem_summary(lp);
    outcome.report["growth_check"] = tsbvp::growth_check_to_json(growth);
    outcome.report["radii_check"] = tsbvp::radii_check_to_json(*p.params, radii_pass);
    outcome.report["bounds"] = tsbvp::bounds_to_json(bounds);
    outcome.pass = growth.pass && growth.side_pass && radii_pass && bounds.all_hold();
    outcome.report["pass"] = outcome.pass;
    return outcome;
}

tsbvp::Json solver_config_echo(const tsbvp::SolverConfig& cfg) {
    tsbvp::Json j;
    j["tol_residual"] = cfg.tol_residual;
    j["tol_sign"] = cfg.tol_sign;
    j["max_newton_iter"] = cfg.max_newton_iter;
    j["fd_step"] = cfg.fd_step;
    j["n_starts"] = cfg.n_starts;
    j["seed"] = cfg.seed;
    j["dedup_radius"] = cfg.dedup_radius;
    j["backtrack_factor"] = cfg.backtrack_factor;
    j["max_backtracks"] = cfg.max_backtracks;
    return j;
}

struct SolveOutcome {
    tsbvp::Json report;
    bool found = false;
};

SolveOutcome run_solve(const tsbvp::LoadedProblem& lp) {
    const auto result = tsbvp::multistart_search(lp.problem, lp.solver);
    SolveOutcome outcome;
    outcome.report["kind"] = "solve";
    outcome.report["problem"] = tsbvp::problem_summary(lp);
    outcome.report["config"] = solver_config_echo(lp.solver);
    const tsbvp::Json search = tsbvp::search_to_json(result);
    for (const auto& [key, value] : search.items())
        outcome.report[key] = value;
    outcome.found = !result.records.empty();
    return outcome;
}

struct CommonFlags {
    std::string problem_path;
    OutputOptions output;
    std::optional<std::uint64_t> seed;
    std::optional<int> starts;
    std::optional<double> tol;
    std::optional<int> threads;
    std::optional<int> samples;
};

void apply_overrides(tsbvp::LoadedProblem& lp, const CommonFlags& flags) {
    if (flags.seed) {
        lp.solver.seed = *flags.seed;
        lp.a1_check.seed = *flags.seed;
    }
    if (flags.starts)
        lp.solver.n_starts = *flags.starts;
    if (flags.tol)
        lp.solver.tol_residual = *flags.tol;
    if (flags.threads)
        lp.solver.threads = *flags.threads;
    if (flags.samples)
        lp.a1_check.samples = *flags.samples;
    lp.solver.validate();
}

void add_output_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--format", flags.output.format, "Report format: human | machine")
        ->check(CLI::IsMember({"human", "machine"}));
    cmd->add_option("--out", flags.output.out_path, "Write the report to this path");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"time-scale boundary value problem toolkit"};
    app.require_subcommand(1);

    CommonFlags verify_flags, solve_flags, iterate_flags, example_flags;
    double iterate_eta = 1.0;
    int iterate_max = 200;
    double iterate_tol = 1e-10;

    auto* verify = app.add_subcommand("verify", "Check the growth and radii hypotheses");
    verify->add_option("--problem", verify_flags.problem_path, "Problem file (JSON)")
        ->required();
    verify->add_option("--seed", verify_flags.seed, "Sampling seed");
    verify->add_option("--samples", verify_flags.samples, "Sampling count for the growth check");
    add_output_flags(verify, verify_flags);

    auto* solve = app.add_subcommand("solve", "Multistart Newton search for solutions");
    solve->add_option("--problem", solve_flags.problem_path, "Problem file (JSON)")->required();
    solve->add_option("--seed", solve_flags.seed, "Multistart seed");
    solve->add_option("--starts", solve_flags.starts, "Number of Newton starts");
    solve->add_option("--tol", solve_flags.tol, "Residual tolerance");
    solve->add_option("--threads", solve_flags.threads, "Worker threads (0 = auto)");
    add_output_flags(solve, solve_flags);

    auto* iterate = app.add_subcommand("iterate", "Run the relaxation fixed-point iteration");
    iterate->add_option("--problem", iterate_flags.problem_path, "Problem file (JSON)")
        ->required();
    iterate->add_option("--eta", iterate_eta, "Relaxation factor (> 0)");
    iterate->add_option("--max-iter", iterate_max, "Iteration budget");
    iterate->add_option("--tol", iterate_tol, "Update-norm stopping tolerance");
    add_output_flags(iterate, iterate_flags);

    auto* example = app.add_subcommand("example", "Verify and solve the bundled example");
    example->add_option("--seed", example_flags.seed, "Multistart seed");
    example->add_option("--starts", example_flags.starts, "Number of Newton starts");
    example->add_option("--tol", example_flags.tol, "Residual tolerance");
    example->add_option("--threads", example_flags.threads, "Worker threads (0 = auto)");
    add_output_flags(example, example_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e);  // --help
        app.exit(e);
        return kExitConfigError;
    }

    try {
        if (verify->parsed()) {
            auto lp = tsbvp::load_problem_file(verify_flags.problem_path);
            apply_overrides(lp, verify_flags);
            auto outcome = run_verify(lp);
            emit(outcome.report, verify_flags.output);
            return outcome.pass ? kExitOk : kExitHypothesisFail;
        }
        if (solve->parsed()) {
            auto lp = tsbvp::load_problem_file(solve_flags.problem_path);
            apply_overrides(lp, solve_flags);
            auto outcome = run_solve(lp);
            emit(outcome.report, solve_flags.output);
            return outcome.found ? kExitOk : kExitNoSolutions;
        }
        if (iterate->parsed()) {
            auto lp = tsbvp::load_problem_file(iterate_flags.problem_path);
            apply_overrides(lp, iterate_flags);
            const auto start = tsbvp::GridFunction::zeros(lp.problem.scale);
            const auto result = tsbvp::relaxation_iterate(lp.problem, start, iterate_eta,
                                                          iterate_max, iterate_tol);
            tsbvp::Json report;
            report["kind"] = "iterate";
            report["problem"] = tsbvp::problem_summary(lp);
            report["relaxation"] =
                tsbvp::relaxation_to_json(result, iterate_eta, iterate_max, iterate_tol);
            report["relaxation"]["terminal"]["residual_inf"] =
                tsbvp::residual_bundle(lp.problem, result.terminal).max_abs();
            emit(report, iterate_flags.output);
            return result.converged ? kExitOk : kExitNoSolutions;
        }
        // example
        auto lp = tsbvp::builtin_example();
        apply_overrides(lp, example_flags);
        auto verify_outcome = run_verify(lp);
        auto solve_outcome = run_solve(lp);
        tsbvp::Json report;
        report["kind"] = "example";
        report["verify"] = verify_outcome.report;
        report["solve"] = solve_outcome.report;
        emit(report, example_flags.output);
        if (!verify_outcome.pass)
            return kExitHypothesisFail;
        return solve_outcome.found ? kExitOk : kExitNoSolutions;
    } catch (const tsbvp::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
}
