#pragma once

#include "cdpg/functions.hpp"
#include "cdpg/graph.hpp"

#include <memory>
#include <vector>

namespace cdpg {

enum class CouplingMode { Inequality, Equality };

/// One agent's cost split f_ij (smooth, strongly convex) + g_ij (prox-friendly),
/// plus its weights. The coupling slice A_ij = A_i / n_i is derived at assembly.
struct AgentProblem {
    SmoothConvexOracle f;
    ProxOracle g;
    double kappa = 0;  // cluster share, sums to 1 over clusters
    double eta = 0;    // within-cluster share, sums to 1 over the cluster
    double pi = 1.0;   // penalty weight, > 0
};

/// The full multi-cluster instance: network, per-agent costs, coupling Ax <= b
/// (or = b), block dimension M and constraint row count B.
class CoupledProblem {
  public:
    CoupledProblem(MultiClusterNetwork network, std::vector<AgentProblem> agents,
                   Eigen::MatrixXd coupling_A, VectorXd coupling_b, CouplingMode mode);

    const MultiClusterNetwork& network() const { return network_; }
    const AgentProblem& agent(int cluster, int j) const {
        return agents_[network_.relabel(cluster, j) - 1];
    }
    const AgentProblem& agent_flat(int global_index) const { return agents_[global_index - 1]; }
    const std::vector<AgentProblem>& agents() const { return agents_; }

    const Eigen::MatrixXd& coupling_A() const { return A_; }
    /// A_i, the M columns of A belonging to cluster i.
    Eigen::MatrixXd coupling_block(int cluster) const {
        return A_.middleCols((cluster - 1) * M_, M_);
    }
    const VectorXd& coupling_b() const { return b_; }
    CouplingMode mode() const { return mode_; }

    int M() const { return M_; }
    int B() const { return B_; }
    int n_clusters() const { return network_.n_clusters(); }
    int total_agents() const { return network_.total_agents(); }

    /// Objective sum_ij f_ij(x_i) + g_ij(x_i) at a stacked primal x in R^{NM}.
    double objective(const VectorXd& x) const;

  private:
    MultiClusterNetwork network_;
    std::vector<AgentProblem> agents_;  // relabeled order
    Eigen::MatrixXd A_;
    VectorXd b_;
    CouplingMode mode_;
    int M_;
    int B_;
};

}  // namespace cdpg
