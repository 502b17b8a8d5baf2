#include "cdpg/config.hpp"
#include "cdpg/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace cdpg;

struct Options {
    std::string scenario;
    std::string config_path;
    std::string out_trace;
    std::string out_summary;
    RunSettings run;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

LoadedConfig load_scenario(const Options& opt, const CLI::App& cmd) {
    LoadedConfig lc;
    if (!opt.config_path.empty()) {
        lc = parse_config(opt.config_path);
    } else if (opt.scenario == "commodity-market") {
        lc.scenario = commodity_market();
    } else if (opt.scenario == "emission-dispatch") {
        lc.scenario = emission_dispatch();
    } else if (opt.scenario == "random-small") {
        lc.scenario = random_small(opt.run.seed, 2, 3);
    } else if (opt.scenario.empty()) {
        throw ConfigError({"either --scenario or --config is required"});
    } else {
        throw ConfigError({"unknown scenario '" + opt.scenario +
                           "' (built-ins: commodity-market, emission-dispatch, random-small)"});
    }
    // Command-line flags override whatever the config's run section said.
    if (cmd.count("--max-iters")) lc.run.max_iters = opt.run.max_iters;
    if (cmd.count("--tol")) lc.run.tol = opt.run.tol;
    if (cmd.count("--safety")) lc.run.safety = opt.run.safety;
    if (cmd.count("--record-every")) lc.run.record_every = opt.run.record_every;
    if (cmd.count("--workers")) lc.run.workers = opt.run.workers;
    if (cmd.count("--seed")) lc.run.seed = opt.run.seed;
    return lc;
}

SolverConfig solver_config(const LoadedConfig& lc) {
    SolverConfig cfg;
    cfg.max_iters = lc.run.max_iters;
    cfg.tol = lc.run.tol;
    cfg.safety = lc.run.safety;
    cfg.record_every = lc.run.record_every;
    cfg.workers = lc.run.workers;
    // The Lagrangian converges to the negated primal optimum.
    if (lc.scenario.reference_objective)
        cfg.reference_objective = -*lc.scenario.reference_objective;
    return cfg;
}

void write_trace(const std::string& path, const ScenarioSpec& scenario, int M,
                 const SolverTrace& trace) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace file '" + path + "'");
    out << "t,consensus_residual,lagrangian,rel_error_o";
    for (size_t i = 0; i < scenario.clusters.size(); ++i)
        for (int j = 1; j <= scenario.clusters[i].size; ++j)
            for (int m = 1; m <= M; ++m)
                out << ",y_hat_" << i + 1 << "." << j << "." << m;
    out << "\n";
    for (const auto& rec : trace.records) {
        out << rec.t << "," << num(rec.metrics.consensus_residual) << ","
            << num(rec.metrics.lagrangian) << ",";
        if (rec.metrics.rel_error) out << num(*rec.metrics.rel_error);
        for (Eigen::Index k = 0; k < rec.metrics.primal.size(); ++k)
            out << "," << num(rec.metrics.primal(k));
        out << "\n";
    }
}

nlohmann::json vec_json(const VectorXd& v) {
    return std::vector<double>(v.begin(), v.end());
}

int cmd_solve(const Options& opt, const CLI::App& cmd) {
    LoadedConfig lc = load_scenario(opt, cmd);
    CoupledProblem problem = lc.scenario.build();
    CdpgSolver solver(problem, lc.run.safety);
    RunResult res = solver.run(solver_config(lc));
    const Metrics final_metrics = res.trace.records.empty()
                                      ? solver.metrics(res.state)
                                      : res.trace.records.back().metrics;

    write_trace(opt.out_trace, lc.scenario, problem.M(), res.trace);

    nlohmann::json summary = {
        {"scenario", lc.scenario.name},
        {"converged", res.converged},
        {"iterations", res.iterations},
        {"wall_seconds", res.wall_seconds},
        {"primal", vec_json(res.primal)},
        {"primal_agents", vec_json(res.primal_agents)},
        {"consensus_residual", final_metrics.consensus_residual},
        {"lagrangian", final_metrics.lagrangian}};
    if (final_metrics.rel_error) summary["rel_error"] = *final_metrics.rel_error;
    if (!opt.out_summary.empty()) {
        std::ofstream out(opt.out_summary);
        if (!out) throw std::runtime_error("cannot write summary file '" + opt.out_summary + "'");
        out << summary.dump(2) << "\n";
    }

    std::cout << "scenario " << lc.scenario.name << ": "
              << (res.converged ? "converged" : "stopped at max iterations") << " after "
              << res.iterations << " iterations (" << res.wall_seconds << " s)\n";
    std::cout << "primal x = " << res.primal.transpose() << "\n";
    std::cout << "consensus residual = " << final_metrics.consensus_residual
              << ", lagrangian = " << final_metrics.lagrangian << "\n";
    if (final_metrics.rel_error)
        std::cout << "relative error o = " << *final_metrics.rel_error << "\n";
    return res.converged ? 0 : 2;
}

int cmd_verify(const Options& opt, const CLI::App& cmd) {
    LoadedConfig lc = load_scenario(opt, cmd);
    CoupledProblem problem = lc.scenario.build();

    ReferenceSolution ref;
    try {
        ref = brute_force_primal(problem);
    } catch (const InfeasibilityError& e) {
        std::cerr << "infeasible problem: " << e.what() << "\n";
        std::cout << "[FAIL] feasibility: " << e.what() << "\n";
        return 3;
    }
    std::cout << "reference primal (" << ref.method << "): x* = " << ref.x_star.transpose()
              << ", H(x*) = " << ref.objective << "\n";

    CdpgSolver solver(problem, lc.run.safety);

    // High-precision run supplies the reference saddle point.
    SolverConfig precise = solver_config(lc);
    precise.max_iters = std::max<long>(lc.run.max_iters, 100000);
    precise.tol = lc.run.tol / 100.0;
    precise.reference_objective = -ref.objective;
    RunResult star = solver.run(precise);
    const KktResiduals kkt = kkt_residuals(solver, star.state.lambda, star.state.omega);
    const bool kkt_ok = kkt.stationarity <= 1e-4 && kkt.consensus <= 1e-4;
    std::cout << (kkt_ok ? "[PASS]" : "[FAIL]") << " kkt residuals: stationarity = "
              << kkt.stationarity << ", consensus = " << kkt.consensus << "\n";

    // Fixed-horizon trace run feeds the ergodic-rate certificate.
    SolverConfig horizon = precise;
    horizon.max_iters = 10000;
    horizon.tol = 1e-300;  // disables the early stop; full 1e4-iteration horizon
    horizon.record_every = 100;
    RunResult traced = solver.run(horizon);
    write_trace(opt.out_trace, lc.scenario, problem.M(), traced.trace);

    const CertificateReport cert = ergodic_rate_certificate(
        solver, traced.trace, star.state.lambda, star.state.omega, VectorXd(), VectorXd());
    std::cout << cert.to_text();

    const double agreement = (star.primal - ref.x_star).lpNorm<Eigen::Infinity>();
    const bool agree_ok = agreement <= 1e-3;
    std::cout << (agree_ok ? "[PASS]" : "[FAIL]")
              << " oracle agreement: ||x - x*||_inf = " << agreement << "\n";

    return (cert.passed && agree_ok && kkt_ok) ? 0 : 3;
}

int cmd_export(const Options& opt, const CLI::App& cmd) {
    LoadedConfig lc = load_scenario(opt, cmd);
    std::cout << export_config(lc.scenario, lc.run);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cluster-based dual proximal gradient simulator"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", opt.scenario,
                        "built-in scenario: commodity-market, emission-dispatch, random-small");
        cmd->add_option("--config", opt.config_path, "JSON config file");
        cmd->add_option("--max-iters", opt.run.max_iters, "iteration cap");
        cmd->add_option("--tol", opt.run.tol, "stopping tolerance");
        cmd->add_option("--safety", opt.run.safety, "step-size safety factor in (0, 1]");
        cmd->add_option("--record-every", opt.run.record_every, "trace recording stride");
        cmd->add_option("--workers", opt.run.workers, "parallel workers for the sweep");
        cmd->add_option("--out-trace", opt.out_trace, "trace CSV path");
        cmd->add_option("--out-summary", opt.out_summary, "summary JSON path");
        cmd->add_option("--seed", opt.run.seed, "seed for the random scenario");
    };
    CLI::App* solve = app.add_subcommand("solve", "run the solver and emit trace/summary");
    CLI::App* verify =
        app.add_subcommand("verify", "independent oracle, KKT and rate-certificate checks");
    CLI::App* exporter =
        app.add_subcommand("export", "print a scenario as a JSON config document");
    add_common(solve);
    add_common(verify);
    add_common(exporter);

    try {
        app.parse(argc, argv);
        if (solve->parsed()) return cmd_solve(opt, *solve);
        if (exporter->parsed()) return cmd_export(opt, *exporter);
        return cmd_verify(opt, *verify);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
