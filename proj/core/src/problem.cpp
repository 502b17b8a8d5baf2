#include "cdpg/problem.hpp"

#include <cmath>

namespace cdpg {

CoupledProblem::CoupledProblem(MultiClusterNetwork network, std::vector<AgentProblem> agents,
                               Eigen::MatrixXd coupling_A, VectorXd coupling_b, CouplingMode mode)
    : network_(std::move(network)),
      agents_(std::move(agents)),
      A_(std::move(coupling_A)),
      b_(std::move(coupling_b)),
      mode_(mode),
      M_(0),
      B_(static_cast<int>(b_.size())) {
    if (static_cast<int>(agents_.size()) != network_.total_agents())
        throw ValidationError("agent count does not match the network");
    if (A_.rows() != B_) throw ValidationError("coupling A row count does not match b");
    if (A_.cols() % network_.n_clusters() != 0)
        throw ValidationError("coupling A column count is not a multiple of the cluster count");
    M_ = static_cast<int>(A_.cols()) / network_.n_clusters();

    double kappa_sum = 0;
    for (int i = 1; i <= network_.n_clusters(); ++i) {
        double eta_sum = 0;
        for (int j = 1; j <= network_.cluster(i).n_agents; ++j) {
            const auto& a = agent(i, j);
            if (a.f.dim() != M_ || a.g.dim() != M_)
                throw ValidationError("agent (" + std::to_string(i) + "," + std::to_string(j) +
                                      ") oracle dimension does not match M");
            if (a.pi <= 0) throw ValidationError("penalty weight pi must be positive");
            if (a.f.sigma() <= 0) throw ValidationError("f must be strongly convex");
            eta_sum += a.eta;
        }
        if (std::abs(eta_sum - 1.0) > 1e-9)
            throw ValidationError("eta weights of cluster " + std::to_string(i) +
                                  " do not sum to 1");
        kappa_sum += agent(i, 1).kappa;
    }
    if (std::abs(kappa_sum - 1.0) > 1e-9)
        throw ValidationError("kappa weights do not sum to 1");
}

double CoupledProblem::objective(const VectorXd& x) const {
    if (x.size() != static_cast<Eigen::Index>(n_clusters()) * M_)
        throw ValidationError("objective: primal dimension mismatch");
    double total = 0;
    for (int i = 1; i <= n_clusters(); ++i) {
        const VectorXd xi = x.segment((i - 1) * M_, M_);
        for (int j = 1; j <= network_.cluster(i).n_agents; ++j) {
            const auto& a = agent(i, j);
            total += a.f.eval(xi) + a.g.eval(xi);
        }
    }
    return total;
}

}  // namespace cdpg
