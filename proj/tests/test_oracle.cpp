#include "cdpg/oracle.hpp"

#include "cdpg/scenarios.hpp"

#include <doctest.h>

#include <random>

using namespace cdpg;

namespace {

VectorXd scalar(double v) { return VectorXd::Constant(1, v); }

CoupledProblem tiny_pair() {
    std::vector<ClusterGraph> clusters;
    clusters.emplace_back(1, 1, std::vector<Edge>{});
    clusters.emplace_back(2, 1, std::vector<Edge>{});
    MultiClusterNetwork net(std::move(clusters), {{1, 2}});
    std::vector<AgentProblem> agents;
    agents.push_back({SmoothConvexOracle(Quadratic{scalar(1.0), scalar(-4.0)}, 1),
                      ProxOracle(BoxIndicator{scalar(0.0), scalar(3.0)}, 1), 0.5, 1.0, 1.0});
    agents.push_back({SmoothConvexOracle(Quadratic{scalar(2.0), scalar(-2.0)}, 1),
                      ProxOracle(BoxIndicator{scalar(0.0), scalar(3.0)}, 1), 0.5, 1.0, 1.0});
    return CoupledProblem(std::move(net), std::move(agents), Eigen::MatrixXd::Ones(1, 2),
                          scalar(2.0), CouplingMode::Inequality);
}

}  // namespace

TEST_CASE("brute force solves an unconstrained scalar quadratic") {
    std::vector<ClusterGraph> clusters;
    clusters.emplace_back(1, 1, std::vector<Edge>{});
    MultiClusterNetwork net(std::move(clusters), {});
    std::vector<AgentProblem> agents;
    // (x - 1)^2 up to a constant: x^2 - 2x.
    agents.push_back({SmoothConvexOracle(Quadratic{scalar(1.0), scalar(-2.0)}, 1),
                      ProxOracle(Zero{}, 1), 1.0, 1.0, 1.0});
    CoupledProblem problem(std::move(net), std::move(agents), Eigen::MatrixXd::Zero(1, 1),
                           scalar(1.0), CouplingMode::Inequality);
    const ReferenceSolution ref = brute_force_primal(problem);
    CHECK(ref.x_star(0) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(ref.objective == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("brute force on a coupled pair matches the hand solution") {
    // min (x1^2 - 4 x1) + (2 x2^2 - 2 x2) s.t. x1 + x2 <= 2, boxes [0,3].
    // Unconstrained optimum (2, 0.5) violates the cap; the multiplier solves
    // (2 - t/2) + (0.5 - t/4) = 2 => t = 2/3, x = (5/3, 1/3).
    const ReferenceSolution ref = brute_force_primal(tiny_pair());
    CHECK(ref.x_star(0) == doctest::Approx(5.0 / 3.0).epsilon(5e-4));
    CHECK(ref.x_star(1) == doctest::Approx(1.0 / 3.0).epsilon(5e-4));
}

TEST_CASE("brute force reproduces the market allocation") {
    const auto spec = commodity_market();
    const ReferenceSolution ref = brute_force_primal(spec.build());
    CHECK((ref.x_star - *spec.reference_primal).lpNorm<Eigen::Infinity>() <= 5e-3);
    CHECK(ref.objective == doctest::Approx(*spec.reference_objective).epsilon(1e-4));
}

TEST_CASE("brute force optimum of the dispatch instance") {
    // Frozen from an independent interior-point solve of the aggregated
    // problem; the demand balance is tight.
    const auto problem = emission_dispatch().build();
    const ReferenceSolution ref = brute_force_primal(problem);
    VectorXd want(3);
    want << 1.11786966, 1.27449551, 2.60763483;
    CHECK((ref.x_star - want).lpNorm<Eigen::Infinity>() <= 2e-3);
    CHECK(ref.objective == doctest::Approx(901.0560699321189).epsilon(1e-6));
    CHECK(std::abs(ref.x_star.sum() - 5.0) <= 1e-8);
}

TEST_CASE("infeasible instances are reported") {
    std::vector<ClusterGraph> clusters;
    clusters.emplace_back(1, 1, std::vector<Edge>{});
    clusters.emplace_back(2, 1, std::vector<Edge>{});
    MultiClusterNetwork net(std::move(clusters), {{1, 2}});
    std::vector<AgentProblem> agents;
    for (int k = 0; k < 2; ++k)
        agents.push_back({SmoothConvexOracle(Quadratic{scalar(1.0), scalar(0.0)}, 1),
                          ProxOracle(BoxIndicator{scalar(2.0), scalar(3.0)}, 1), 0.5, 1.0,
                          1.0});
    // Box minimum sum is 4 > b = 3.
    CoupledProblem problem(std::move(net), std::move(agents), Eigen::MatrixXd::Ones(1, 2),
                           scalar(3.0), CouplingMode::Inequality);
    CHECK_THROWS_AS(brute_force_primal(problem), InfeasibilityError);
}

TEST_CASE("kkt residuals vanish at a saddle point and grow away from it") {
    const auto problem = tiny_pair();
    CdpgSolver solver(problem);
    SolverConfig cfg;
    cfg.tol = 1e-12;
    cfg.max_iters = 300000;
    const RunResult res = solver.run(cfg);
    REQUIRE(res.converged);

    const KktResiduals at = kkt_residuals(solver, res.state.lambda, res.state.omega);
    CHECK(at.stationarity <= 1e-8);
    CHECK(at.consensus <= 1e-8);

    std::mt19937_64 rng(21);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double last = 0.0;
    for (double delta : {1e-4, 1e-2}) {
        VectorXd perturbed = res.state.lambda;
        for (Eigen::Index k = 0; k < perturbed.size(); ++k)
            perturbed(k) += delta * gauss(rng);
        const KktResiduals off = kkt_residuals(solver, perturbed, res.state.omega);
        CHECK(off.stationarity > last);
        last = off.stationarity;
    }
}

TEST_CASE("consensual lambda has zero consensus residual") {
    const auto problem = tiny_pair();
    CdpgSolver solver(problem);
    const KktResiduals res =
        kkt_residuals(solver, VectorXd::Zero(solver.assembly().dual_dim),
                      VectorXd::Zero(solver.assembly().omega_dim()));
    CHECK(res.consensus == 0.0);
}

TEST_CASE("kkt residuals stay small at convergence on both built-in scenarios") {
    for (const auto& spec : {commodity_market(), emission_dispatch()}) {
        const auto problem = spec.build();
        CdpgSolver solver(problem);
        SolverConfig cfg;
        cfg.tol = 1e-10;
        cfg.max_iters = 300000;
        const RunResult res = solver.run(cfg);
        REQUIRE(res.converged);
        const KktResiduals kkt = kkt_residuals(solver, res.state.lambda, res.state.omega);
        CHECK(kkt.stationarity <= 1e-4);
        CHECK(kkt.consensus <= 1e-4);
    }
}

TEST_CASE("rate certificate holds on a converged market trace") {
    const auto spec = commodity_market();
    const auto problem = spec.build();
    CdpgSolver solver(problem);

    SolverConfig precise;
    precise.tol = 1e-11;
    precise.max_iters = 300000;
    const RunResult star = solver.run(precise);
    REQUIRE(star.converged);

    SolverConfig horizon;
    horizon.tol = 1e-300;
    horizon.max_iters = 10000;
    horizon.record_every = 100;
    const RunResult traced = solver.run(horizon);

    const CertificateReport cert =
        ergodic_rate_certificate(solver, traced.trace, star.state.lambda, star.state.omega,
                             VectorXd(), VectorXd());
    CHECK(cert.theta > 0);
    CHECK(cert.passed);
    CHECK(cert.checks.size() >= 100);
    // Bounded t * ||Z lambda_bar||: implied by the feasibility half of the
    // certificate whenever omega* is nonzero.
    CHECK(cert.residual_rate_constant <=
          cert.theta / std::max(cert.omega_star_norm, 1e-12) + 1e-6);
    CHECK(cert.to_text().find("certificate PASSED") != std::string::npos);
}

TEST_CASE("certificate collapses at a stationary start") {
    const auto problem = tiny_pair();
    CdpgSolver solver(problem);
    SolverConfig cfg;
    cfg.tol = 1e-12;
    cfg.max_iters = 300000;
    const RunResult res = solver.run(cfg);
    REQUIRE(res.converged);

    SolverTrace empty_trace;
    const CertificateReport cert =
        ergodic_rate_certificate(solver, empty_trace, res.state.lambda, res.state.omega,
                             res.state.lambda, res.state.omega);
    const VectorXd d_inv = solver.assembly().D_pi.cwiseInverse();
    const double want = 5.0 * res.state.omega.dot(d_inv.cwiseProduct(res.state.omega));
    CHECK(cert.theta == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("certificate flags a fabricated bound violation") {
    const auto problem = tiny_pair();
    CdpgSolver solver(problem);
    SolverConfig cfg;
    cfg.tol = 1e-10;
    const RunResult res = solver.run(cfg);

    SolverTrace fake;
    TraceRecord rec;
    rec.t = 1000000;  // tiny bound Theta/t
    rec.lambda_bar = VectorXd::Constant(solver.assembly().dual_dim, 7.0);  // far off
    rec.z_lambda_bar_norm = solver.consensus_norm(rec.lambda_bar);
    fake.records.push_back(rec);
    const CertificateReport cert = ergodic_rate_certificate(
        solver, fake, res.state.lambda, res.state.omega, VectorXd(), VectorXd());
    CHECK(!cert.passed);
    CHECK(cert.to_text().find("VIOLATED") != std::string::npos);
}
