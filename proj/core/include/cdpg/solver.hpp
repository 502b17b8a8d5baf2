#pragma once

#include "cdpg/operators.hpp"

#include <optional>

namespace cdpg {

struct DivergenceError : std::runtime_error {
    long iteration = -1;
    DivergenceError(long t)
        : std::runtime_error("non-finite dual state at iteration " + std::to_string(t)),
          iteration(t) {}
};

/// Stacked dual state: lambda holds every agent's (mu, gamma, theta) block,
/// omega the edge multipliers (xi blocks then zeta blocks, Z row layout).
struct IterateState {
    VectorXd lambda;
    VectorXd omega;
    long t = 0;
};

struct Metrics {
    double consensus_residual = 0;  // ||Z lambda||
    double lagrangian = 0;          // L(lambda, omega) of the penalized dual
    std::optional<double> rel_error;  // o, only when a reference value is known
    bool rel_error_is_absolute = false;  // reference objective was zero
    bool indicator_violated = false;     // theta left R^B_+ beyond 1e-12
    VectorXd primal;                // recovered y_ij stacked per agent (M each)
    VectorXd cluster_primal;        // per-cluster mean estimate, N*M
};

struct TraceRecord {
    long t = 0;
    Metrics metrics;
    VectorXd lambda_bar;  // ergodic average at this iteration
    double z_lambda_bar_norm = 0;
};

struct SolverTrace {
    std::vector<TraceRecord> records;
};

struct RunResult {
    SolverTrace trace;
    IterateState state;
    VectorXd lambda_bar;
    VectorXd primal;          // cluster means, N*M
    VectorXd primal_agents;   // per-agent recovery
    bool converged = false;
    long iterations = 0;
    double wall_seconds = 0;
};

struct SolverConfig {
    long max_iters = 100000;
    double tol = 1e-8;
    double safety = 1.0;
    long record_every = 100;
    int workers = 1;
    std::optional<CouplingMode> mode_override;
    // Known limit of the dual Lagrangian, i.e. the negated primal optimum
    // -H(x*); the relative error o compares L(lambda, omega) against it.
    std::optional<double> reference_objective;
    VectorXd lambda0;  // empty -> zeros
    VectorXd omega0;   // empty -> zeros
    bool use_gershgorin = false;
};

/// The CDPG engine: owns the assembled operators and step sizes and runs the
/// two-phase bulk-synchronous sweep. Immutable after construction; iterate()
/// is pure in the state.
class CdpgSolver {
  public:
    CdpgSolver(const CoupledProblem& problem, double safety = 1.0, bool use_gershgorin = false);

    const Assembly& assembly() const { return asmb_; }
    const StepSizes& steps() const { return steps_; }
    const CoupledProblem& problem() const { return *problem_; }
    CouplingMode mode() const { return mode_; }
    void set_mode(CouplingMode m) { mode_ = m; }

    IterateState initial_state() const;
    IterateState initial_state(const VectorXd& lambda0, const VectorXd& omega0) const;

    /// One full iteration: phase 1 updates every agent's (mu, gamma, theta)
    /// from iteration-t values only; phase 2 updates every edge multiplier
    /// from the fresh lambda. Throws DivergenceError on NaN/Inf.
    IterateState iterate(const IterateState& state, int workers = 1) const;

    /// grad p_ij = H^T argmax_u((H lambda)^T u - f(u)) + E^T.
    VectorXd grad_p(int agent_flat, const VectorXd& lambda_ij) const;

    /// y_ij = argmin_y f(y) + (mu + L^T gamma + A^T theta)^T y.
    VectorXd recover_primal_agent(int agent_flat, const VectorXd& lambda_ij) const;
    /// All agents stacked (M entries each, relabeled order).
    VectorXd recover_primal(const VectorXd& lambda) const;
    /// Cluster means of the recovered estimates, N*M.
    VectorXd cluster_means(const VectorXd& primal_agents) const;

    Metrics metrics(const IterateState& state,
                    std::optional<double> reference_objective = std::nullopt) const;

    /// P(lambda) + Q(lambda); +inf when an indicator is violated beyond 1e-12.
    double phi(const VectorXd& lambda) const;

    /// Full driver loop. Applies the config's mode override for the
    /// duration of the run, hence non-const.
    RunResult run(const SolverConfig& config);

    /// ||Z lambda||, computed edgewise.
    double consensus_norm(const VectorXd& lambda) const;
    /// Z lambda stacked in edge order (equals omega-layout).
    VectorXd consensus_gaps(const VectorXd& lambda) const;

  private:
    // Edge references seen from a single agent, resolved to flat indices.
    struct EdgeRef {
        int other = 0;      // flat index of the agent on the other end
        int row = 0;        // row offset into omega / Z
        double pi = 0;      // penalty weight of the edge owner
    };
    struct AgentEdgeRefs {
        std::vector<EdgeRef> intra_above, intra_below, global_above, global_below;
    };

    const CoupledProblem* problem_;
    Assembly asmb_;
    StepSizes steps_;
    CouplingMode mode_;
    std::vector<AgentEdgeRefs> edge_refs_;

    void update_agent(int flat, const VectorXd& lambda, const VectorXd& omega,
                      VectorXd& lambda_next) const;
    void update_edges(const VectorXd& lambda_next, const VectorXd& omega,
                      VectorXd& omega_next) const;
};

/// Incrementally maintained ergodic average of the lambda iterates.
class ErgodicAverage {
  public:
    void add(const VectorXd& lambda) {
        ++count_;
        if (mean_.size() == 0) mean_ = VectorXd::Zero(lambda.size());
        mean_ += (lambda - mean_) / static_cast<double>(count_);
    }
    const VectorXd& mean() const { return mean_; }
    long count() const { return count_; }

  private:
    VectorXd mean_;
    long count_ = 0;
};

}  // namespace cdpg
