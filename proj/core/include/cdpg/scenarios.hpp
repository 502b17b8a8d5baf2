#pragma once

#include "cdpg/problem.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace cdpg {

/// Declarative description of a problem instance: everything needed to build
/// a CoupledProblem, plus an optional published reference solution. This is
/// the in-memory mirror of the JSON config format.
struct ScenarioSpec {
    struct Cluster {
        int size = 0;
        std::vector<std::pair<int, int>> intra_edges;
    };
    struct AgentFunctions {
        FunctionSpec f;
        FunctionSpec g;
    };

    std::string name;
    std::vector<Cluster> clusters;
    std::vector<std::pair<int, int>> global_edges;  // relabeled indices
    std::vector<AgentFunctions> agents;             // relabeled order
    Eigen::MatrixXd A;                              // B x N*M
    VectorXd b;
    CouplingMode mode = CouplingMode::Inequality;
    std::vector<double> kappa;  // per cluster
    std::vector<double> eta;    // per agent, relabeled order
    std::vector<double> pi;     // per agent, relabeled order
    std::optional<VectorXd> reference_primal;      // x*, N*M
    std::optional<double> reference_objective;     // H(x*)

    MultiClusterNetwork build_network() const;
    CoupledProblem build() const;
};

/// Three-cluster commodity market: sizes (4, 3, 2), negated quadratic
/// utilities with per-agent production boxes, total supply 1'x <= 5.
/// topology_variant selects among three documented connected layouts
/// (0 = paths, 1 = stars, 2 = rings); the optimum is topology-independent.
ScenarioSpec commodity_market(int topology_variant = 0);

/// Three-region economic emission dispatch: quadratic generation cost blended
/// with quadratic-plus-exponential emission, equal split across 3 agents per
/// region, demand balance 1'x = 5 (equality mode).
ScenarioSpec emission_dispatch();

/// Seeded random small instance (N clusters, at most n_max agents each,
/// M = 1, B = 1): positive quadratics, feasible boxes with a strictly
/// interior witness, spanning-tree-plus-extras topologies, 1'x <= b.
ScenarioSpec random_small(std::uint64_t seed, int N, int n_max);

}  // namespace cdpg
