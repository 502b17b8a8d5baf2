#pragma once

#include "cdpg/problem.hpp"

namespace cdpg {

/// Per-agent dual operators. lambda_ij = (mu, gamma, theta) has blocks of
/// size (M, n_i M, B); H maps it to the argument of f* and E carries the
/// kappa_i eta_ij b^T term.
struct AgentOperators {
    Eigen::MatrixXd H;        // M x (M + n_i M + B)
    VectorXd kappa_eta_b;     // kappa_i eta_ij b, the theta block of E^T
    Eigen::MatrixXd A_slice;  // A_ij = A_i / n_i, B x M
    Eigen::MatrixXd L_col;    // augmented Laplacian column block, n_i M x M
    int M = 0;
    int n_i = 0;
    int B = 0;
    int dim() const { return M + n_i * M + B; }
    /// E_ij as a dense row vector: [0, 0, kappa_i eta_ij b^T].
    Eigen::RowVectorXd E_row() const {
        Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(dim());
        e.tail(B) = kappa_eta_b.transpose();
        return e;
    }
};

/// One consensus edge as a block of rows of Z. Intra edges carry n_i M rows
/// (gamma agreement), global edges carry B rows (theta agreement).
struct ConsensusEdge {
    bool intra = true;
    int cluster = 0;      // intra only
    int owner = 0;        // local agent index j (intra) or relabeled n_ij (global)
    int neighbor = 0;     // l in S_ij (intra, local) or k in Sbar_ij (global)
    int row_offset = 0;   // first row in Z / omega
    int rows = 0;
    double pi = 0;        // owner's penalty weight
};

/// Assembled network-wide operators for the dual problem.
struct Assembly {
    std::vector<AgentOperators> ops;   // relabeled agent order
    std::vector<int> agent_offset;     // offset of lambda_ij inside stacked lambda
    int dual_dim = 0;                  // total lambda dimension
    Eigen::MatrixXd Z;                 // consensus operator, rows x dual_dim
    VectorXd D_pi;                     // diagonal of D[pi], one entry per Z row
    std::vector<ConsensusEdge> edges;  // intra blocks first, then global
    NeighborSets neighbors;

    int omega_dim() const { return static_cast<int>(D_pi.size()); }
    /// Z^T D[pi] Z, materialized densely.
    Eigen::MatrixXd ztdz() const { return Z.transpose() * D_pi.asDiagonal() * Z; }
};

/// Builds H_ij, E_ij, the consensus operator Z and the penalty diagonal D[pi].
/// Z lambda = 0 holds exactly when all gamma blocks agree within each cluster
/// and all theta blocks agree across the network.
Assembly assemble(const CoupledProblem& problem);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration,
/// 1e-10 relative tolerance. Throws NumericalError on stagnation.
double power_iteration_max_eig(const Eigen::MatrixXd& S);

/// Spectral norm of H via power iteration on H^T H.
double spectral_norm(const Eigen::MatrixXd& H);

/// h_ij = ||H_ij||^2 / sigma_ij, the Lipschitz constant of grad p_ij.
double lipschitz_h(const AgentOperators& op, double sigma);

struct StepSizes {
    std::vector<double> c;  // per agent, relabeled order
    std::vector<double> h;  // per agent
    double tau_max = 0;     // largest eigenvalue of Z^T D[pi] Z
};

/// c_ij = safety / (h_ij + tau_max), safety in (0, 1] for the convergence
/// guarantee (larger values are accepted but void it). When use_gershgorin is
/// set, tau_max is replaced by the Gershgorin row-sum upper bound, which each
/// agent could assemble from local degrees.
StepSizes step_sizes(const CoupledProblem& problem, const Assembly& asmb, double safety,
                     bool use_gershgorin = false);

}  // namespace cdpg
