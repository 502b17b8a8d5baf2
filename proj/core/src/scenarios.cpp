#include "cdpg/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cdpg {

namespace {

std::vector<std::pair<int, int>> path_edges(int n) {
    std::vector<std::pair<int, int>> e;
    for (int k = 1; k < n; ++k) e.emplace_back(k, k + 1);
    return e;
}

std::vector<std::pair<int, int>> star_edges(int n) {
    std::vector<std::pair<int, int>> e;
    for (int k = 2; k <= n; ++k) e.emplace_back(1, k);
    return e;
}

std::vector<std::pair<int, int>> ring_edges(int n) {
    auto e = path_edges(n);
    if (n >= 3) e.emplace_back(1, n);
    return e;
}

VectorXd scalar(double v) { return VectorXd::Constant(1, v); }

}  // namespace

MultiClusterNetwork ScenarioSpec::build_network() const {
    std::vector<ClusterGraph> cgs;
    cgs.reserve(clusters.size());
    for (size_t i = 0; i < clusters.size(); ++i) {
        std::vector<Edge> edges;
        for (auto [j, l] : clusters[i].intra_edges) edges.emplace_back(j, l);
        cgs.emplace_back(static_cast<int>(i) + 1, clusters[i].size, std::move(edges));
    }
    std::vector<Edge> ge;
    for (auto [a, b2] : global_edges) ge.emplace_back(a, b2);
    return MultiClusterNetwork(std::move(cgs), std::move(ge));
}

CoupledProblem ScenarioSpec::build() const {
    MultiClusterNetwork net = build_network();
    const int T = net.total_agents();
    if (static_cast<int>(agents.size()) != T)
        throw ValidationError("scenario agent count does not match the network");
    if (static_cast<int>(kappa.size()) != net.n_clusters() ||
        static_cast<int>(eta.size()) != T || static_cast<int>(pi.size()) != T)
        throw ValidationError("scenario weight vectors have inconsistent sizes");
    const int M = static_cast<int>(A.cols()) / net.n_clusters();

    std::vector<AgentProblem> built;
    built.reserve(agents.size());
    for (int k = 1; k <= T; ++k) {
        auto [i, j] = net.unlabel(k);
        (void)j;
        built.push_back({SmoothConvexOracle(agents[k - 1].f, M),
                         ProxOracle(agents[k - 1].g, M), kappa[i - 1], eta[k - 1],
                         pi[k - 1]});
    }
    return CoupledProblem(std::move(net), std::move(built), A, b, mode);
}

ScenarioSpec commodity_market(int topology_variant) {
    if (topology_variant < 0 || topology_variant > 2)
        throw ValidationError("commodity_market topology variant must be 0, 1 or 2");

    // Per-agent utility curvature |w|, linear reward s, production cap.
    const std::vector<std::vector<double>> w = {
        {0.1, 0.2, 0.3, 0.2}, {0.5, 0.45, 0.55}, {0.8, 0.9}};
    const std::vector<std::vector<double>> s = {
        {2.1, 2.2, 2.0, 1.9}, {0.2, 0.25, 0.5}, {3.3, 4.1}};
    const std::vector<std::vector<double>> cap = {
        {10.5, 5.5, 3.33, 4.75}, {0.2, 0.27, 0.45}, {2.06, 2.27}};

    ScenarioSpec spec;
    spec.name = "commodity-market";
    spec.mode = CouplingMode::Inequality;
    spec.A = Eigen::MatrixXd::Ones(1, 3);
    spec.b = scalar(5.0);

    int total = 0;
    for (size_t i = 0; i < w.size(); ++i) {
        const int n = static_cast<int>(w[i].size());
        ScenarioSpec::Cluster cl;
        cl.size = n;
        cl.intra_edges = topology_variant == 0   ? path_edges(n)
                         : topology_variant == 1 ? star_edges(n)
                                                 : ring_edges(n);
        spec.clusters.push_back(std::move(cl));
        spec.kappa.push_back(1.0 / 3.0);
        for (int j = 0; j < n; ++j) {
            // Utilities w x^2 + s x with w < 0 are maximized; the solver
            // minimizes the negation |w| x^2 - s x.
            spec.agents.push_back({Quadratic{scalar(w[i][j]), scalar(-s[i][j])},
                                   BoxIndicator{scalar(0.0), scalar(cap[i][j])}});
            spec.eta.push_back(1.0 / n);
            spec.pi.push_back(1.0);
        }
        total += n;
    }
    spec.global_edges = topology_variant == 0   ? path_edges(total)
                        : topology_variant == 1 ? star_edges(total)
                                                : ring_edges(total);

    VectorXd x_star(3);
    x_star << 3.33, 0.0, 1.67;
    spec.reference_primal = x_star;
    spec.reference_objective = spec.build().objective(x_star);
    return spec;
}

ScenarioSpec emission_dispatch() {
    struct Region {
        double lo, hi;
        double a1, a2;  // generation cost a1 x^2 + a2 x
        double b1, b2;  // SO2 emission b1 x^2 + b2 x
        double r1, r2, r3;  // NOx emission r1 exp(r2 x) + r3 x
    };
    const std::vector<Region> regions = {
        {0.05, 5.0, 100.0, 200.0, 6.490, -2.000, 0.255, 0.012, -3.554},
        {0.05, 10.0, 120.0, 150.0, 5.638, -3.000, 0.250, 0.012, -4.047},
        {0.05, 10.0, 40.0, 180.0, 4.586, -2.000, 0.255, 0.012, -3.094}};
    const double chi = 0.5;
    const int n = 3;  // generators per region, equal cost split

    ScenarioSpec spec;
    spec.name = "emission-dispatch";
    spec.mode = CouplingMode::Equality;
    spec.A = Eigen::MatrixXd::Ones(1, 3);
    spec.b = scalar(5.0);

    int total = 0;
    for (const auto& r : regions) {
        // Price penalty factor: cost over total emission, both at the cap.
        const double cost_hi = r.a1 * r.hi * r.hi + r.a2 * r.hi;
        const double emis_hi = r.b1 * r.hi * r.hi + r.b2 * r.hi +
                               r.r1 * std::exp(r.r2 * r.hi) + r.r3 * r.hi;
        const double delta = cost_hi / emis_hi;
        const double blend = (1.0 - chi) * delta;

        ScenarioSpec::Cluster cl;
        cl.size = n;
        cl.intra_edges = path_edges(n);
        spec.clusters.push_back(std::move(cl));
        spec.kappa.push_back(1.0 / 3.0);
        for (int j = 0; j < n; ++j) {
            spec.agents.push_back(
                {QuadExp{(chi * r.a1 + blend * r.b1) / n,
                         (chi * r.a2 + blend * (r.b2 + r.r3)) / n,
                         blend * r.r1 / n, r.r2},
                 BoxIndicator{scalar(r.lo), scalar(r.hi)}});
            spec.eta.push_back(1.0 / n);
            spec.pi.push_back(1.0);
        }
        total += n;
    }
    spec.global_edges = path_edges(total);

    VectorXd x_star(3);
    x_star << 2.38, 2.57, 0.05;
    spec.reference_primal = x_star;
    spec.reference_objective = spec.build().objective(x_star);
    return spec;
}

ScenarioSpec random_small(std::uint64_t seed, int N, int n_max) {
    if (N < 1 || N > 3 || n_max < 1 || n_max > 3)
        throw ValidationError("random_small requires 1 <= N <= 3 and 1 <= n_max <= 3");
    std::mt19937_64 rng(seed);
    auto uni = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    auto uni_int = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };
    // Spanning tree first (connectivity by construction), extras by coin flip.
    auto random_edges = [&](int n) {
        std::vector<std::pair<int, int>> e;
        for (int v = 2; v <= n; ++v) e.emplace_back(uni_int(1, v - 1), v);
        for (int u = 1; u <= n; ++u)
            for (int v = u + 1; v <= n; ++v) {
                const bool present =
                    std::find(e.begin(), e.end(), std::make_pair(u, v)) != e.end();
                if (!present && uni(0.0, 1.0) < 0.2) e.emplace_back(u, v);
            }
        return e;
    };

    ScenarioSpec spec;
    spec.name = "random-small-" + std::to_string(seed);
    spec.mode = CouplingMode::Inequality;
    spec.A = Eigen::MatrixXd::Ones(1, N);

    int total = 0;
    double witness_sum = 0;
    std::vector<double> kappa_raw, eta_raw;
    for (int i = 0; i < N; ++i) {
        const int n = uni_int(1, n_max);
        ScenarioSpec::Cluster cl;
        cl.size = n;
        cl.intra_edges = random_edges(n);
        spec.clusters.push_back(std::move(cl));
        kappa_raw.push_back(uni(0.5, 1.5));

        // A common core box keeps the per-cluster intersection nonempty;
        // each agent's box pads the core outward.
        const double lo = uni(-2.0, 0.0);
        const double hi = lo + uni(0.5, 3.0);
        witness_sum += 0.5 * (lo + hi);
        double eta_sum = 0;
        std::vector<double> etas;
        for (int j = 0; j < n; ++j) {
            spec.agents.push_back(
                {Quadratic{scalar(uni(0.5, 3.0)), scalar(uni(-5.0, 5.0))},
                 BoxIndicator{scalar(lo - uni(0.0, 1.0)), scalar(hi + uni(0.0, 1.0))}});
            spec.pi.push_back(uni(0.5, 2.0));
            etas.push_back(uni(0.5, 1.5));
            eta_sum += etas.back();
        }
        for (double e : etas) spec.eta.push_back(e / eta_sum);
        total += n;
    }
    spec.global_edges = random_edges(total);

    double kappa_sum = 0;
    for (double k : kappa_raw) kappa_sum += k;
    for (double k : kappa_raw) spec.kappa.push_back(k / kappa_sum);

    // Strictly feasible by construction: the core-midpoint witness satisfies
    // 1'x < b with slack.
    spec.b = scalar(witness_sum + uni(0.5, 2.0));
    return spec;
}

}  // namespace cdpg
