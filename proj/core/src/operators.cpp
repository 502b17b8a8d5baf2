#include "cdpg/operators.hpp"

#include <cmath>
#include <cstdint>

namespace cdpg {

Assembly assemble(const CoupledProblem& problem) {
    const auto& net = problem.network();
    const int N = net.n_clusters();
    const int M = problem.M();
    const int B = problem.B();

    Assembly out;
    out.neighbors = net.neighbor_sets();
    out.ops.reserve(net.total_agents());
    out.agent_offset.reserve(net.total_agents());

    const Eigen::MatrixXd I_M = Eigen::MatrixXd::Identity(M, M);
    int offset = 0;
    for (int i = 1; i <= N; ++i) {
        const auto& cluster = net.cluster(i);
        const int n = cluster.n_agents;
        const Eigen::MatrixXd L = cluster.laplacian_matrix().cast<double>();
        const Eigen::MatrixXd A_i = problem.coupling_block(i);
        for (int j = 1; j <= n; ++j) {
            const auto& agent = problem.agent(i, j);
            AgentOperators op;
            op.M = M;
            op.n_i = n;
            op.B = B;
            op.A_slice = A_i / n;
            // Augmented Laplacian column block (column j of L) kron I_M.
            op.L_col = Eigen::MatrixXd::Zero(n * M, M);
            for (int r = 0; r < n; ++r) op.L_col.block(r * M, 0, M, M) = L(r, j - 1) * I_M;
            op.H = Eigen::MatrixXd::Zero(M, op.dim());
            op.H.leftCols(M) = -I_M;
            op.H.middleCols(M, n * M) = -op.L_col.transpose();
            op.H.rightCols(B) = -op.A_slice.transpose();
            op.kappa_eta_b = agent.kappa * agent.eta * problem.coupling_b();
            out.agent_offset.push_back(offset);
            offset += op.dim();
            out.ops.push_back(std::move(op));
        }
    }
    out.dual_dim = offset;

    // Edge records: intra blocks for every cluster first, then global blocks,
    // each owner's edges ascending (the canonical edge order).
    int row = 0;
    for (int i = 1; i <= N; ++i) {
        const int n = net.cluster(i).n_agents;
        for (int j = 1; j <= n; ++j) {
            for (int l : out.neighbors.per_agent[net.relabel(i, j) - 1].intra_above) {
                out.edges.push_back({true, i, j, l, row, n * M, problem.agent(i, j).pi});
                row += n * M;
            }
        }
    }
    for (int k = 1; k <= net.total_agents(); ++k) {
        for (int g : out.neighbors.per_agent[k - 1].global_above) {
            auto [i, j] = net.unlabel(k);
            out.edges.push_back({false, i, k, g, row, B, problem.agent(i, j).pi});
            row += B;
        }
    }

    out.Z = Eigen::MatrixXd::Zero(row, out.dual_dim);
    out.D_pi = VectorXd::Zero(row);
    for (const auto& e : out.edges) {
        out.D_pi.segment(e.row_offset, e.rows).setConstant(e.pi);
        if (e.intra) {
            const int n = net.cluster(e.cluster).n_agents;
            const int own = out.agent_offset[net.relabel(e.cluster, e.owner) - 1];
            const int nb = out.agent_offset[net.relabel(e.cluster, e.neighbor) - 1];
            // gamma_il - gamma_ij = 0
            out.Z.block(e.row_offset, nb + M, e.rows, n * M).setIdentity();
            out.Z.block(e.row_offset, own + M, e.rows, n * M) =
                -Eigen::MatrixXd::Identity(e.rows, n * M);
        } else {
            auto [io, jo] = net.unlabel(e.owner);
            auto [in, jn] = net.unlabel(e.neighbor);
            const int own = out.agent_offset[e.owner - 1] + M + net.cluster(io).n_agents * M;
            const int nb = out.agent_offset[e.neighbor - 1] + M + net.cluster(in).n_agents * M;
            // theta_k - theta_{n_ij} = 0
            out.Z.block(e.row_offset, nb, B, B).setIdentity();
            out.Z.block(e.row_offset, own, B, B) = -Eigen::MatrixXd::Identity(B, B);
        }
    }
    return out;
}

double power_iteration_max_eig(const Eigen::MatrixXd& S) {
    const Eigen::Index n = S.rows();
    if (n == 0) return 0.0;
    VectorXd x(n);
    // Deterministic pseudo-random start; a structured start such as all-ones
    // can sit in the nullspace of a consensus operator.
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    for (Eigen::Index k = 0; k < n; ++k) {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        x(k) = static_cast<double>(state >> 11) / 9007199254740992.0 - 0.5;
    }
    x.normalize();
    double eig = 0;
    for (int it = 0; it < 20000; ++it) {
        VectorXd y = S * x;
        const double norm = y.norm();
        if (norm <= 1e-300) return 0.0;  // start landed in the nullspace of a PSD matrix
        y /= norm;
        const double next = y.dot(S * y);
        if (std::abs(next - eig) <= 1e-10 * std::max(1.0, std::abs(next))) return next;
        eig = next;
        x = y;
    }
    throw NumericalError("power iteration stagnated", eig);
}

double spectral_norm(const Eigen::MatrixXd& H) {
    return std::sqrt(power_iteration_max_eig(H.transpose() * H));
}

double lipschitz_h(const AgentOperators& op, double sigma) {
    if (sigma <= 0) throw ValidationError("lipschitz_h requires sigma > 0");
    const double nrm = spectral_norm(op.H);
    return nrm * nrm / sigma;
}

StepSizes step_sizes(const CoupledProblem& problem, const Assembly& asmb, double safety,
                     bool use_gershgorin) {
    if (safety <= 0) throw ValidationError("step-size safety factor must be positive");
    StepSizes out;
    if (use_gershgorin) {
        const Eigen::MatrixXd S = asmb.ztdz();
        out.tau_max = S.rows() == 0 ? 0.0 : S.cwiseAbs().rowwise().sum().maxCoeff();
    } else {
        out.tau_max = asmb.Z.rows() == 0 ? 0.0 : power_iteration_max_eig(asmb.ztdz());
    }
    out.h.reserve(asmb.ops.size());
    out.c.reserve(asmb.ops.size());
    for (size_t k = 0; k < asmb.ops.size(); ++k) {
        const double h = lipschitz_h(asmb.ops[k], problem.agents()[k].f.sigma());
        out.h.push_back(h);
        out.c.push_back(safety / (h + out.tau_max));
    }
    return out;
}

}  // namespace cdpg
