#include "cdpg/solver.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <thread>

namespace cdpg {

namespace {

constexpr double kIndicatorTol = 1e-12;
constexpr long kPrimalWindow = 50;

void parallel_for(int count, int workers, const std::function<void(int)>& body) {
    if (workers <= 1 || count < 2 * workers) {
        for (int k = 0; k < count; ++k) body(k);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int lo = w * chunk, hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            for (int k = lo; k < hi; ++k) body(k);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

CdpgSolver::CdpgSolver(const CoupledProblem& problem, double safety, bool use_gershgorin)
    : problem_(&problem),
      asmb_(assemble(problem)),
      steps_(step_sizes(problem, asmb_, safety, use_gershgorin)),
      mode_(problem.mode()) {
    const auto& net = problem.network();
    edge_refs_.resize(net.total_agents());
    for (const auto& e : asmb_.edges) {
        if (e.intra) {
            const int own = net.relabel(e.cluster, e.owner) - 1;
            const int nb = net.relabel(e.cluster, e.neighbor) - 1;
            edge_refs_[own].intra_above.push_back({nb, e.row_offset, e.pi});
            edge_refs_[nb].intra_below.push_back({own, e.row_offset, e.pi});
        } else {
            const int own = e.owner - 1;
            const int nb = e.neighbor - 1;
            edge_refs_[own].global_above.push_back({nb, e.row_offset, e.pi});
            edge_refs_[nb].global_below.push_back({own, e.row_offset, e.pi});
        }
    }
}

IterateState CdpgSolver::initial_state() const {
    return {VectorXd::Zero(asmb_.dual_dim), VectorXd::Zero(asmb_.omega_dim()), 0};
}

IterateState CdpgSolver::initial_state(const VectorXd& lambda0, const VectorXd& omega0) const {
    IterateState s = initial_state();
    if (lambda0.size() != 0) {
        if (lambda0.size() != asmb_.dual_dim)
            throw ValidationError("lambda0 dimension mismatch");
        s.lambda = lambda0;
    }
    if (omega0.size() != 0) {
        if (omega0.size() != asmb_.omega_dim())
            throw ValidationError("omega0 dimension mismatch");
        s.omega = omega0;
    }
    return s;
}

VectorXd CdpgSolver::grad_p(int flat, const VectorXd& lambda_ij) const {
    const auto& op = asmb_.ops[flat];
    const VectorXd u = problem_->agents()[flat].f.conjugate_argmax(op.H * lambda_ij);
    VectorXd g = op.H.transpose() * u;
    g.tail(op.B) += op.kappa_eta_b;
    return g;
}

void CdpgSolver::update_agent(int flat, const VectorXd& lambda, const VectorXd& omega,
                              VectorXd& next) const {
    const auto& op = asmb_.ops[flat];
    const auto& agent = problem_->agents()[flat];
    const auto& refs = edge_refs_[flat];
    const int a = asmb_.agent_offset[flat];
    const int M = op.M, nM = op.n_i * op.M, B = op.B;
    const double c = steps_.c[flat];
    const double pi = agent.pi;

    const VectorXd lam = lambda.segment(a, op.dim());
    const VectorXd g = grad_p(flat, lam);

    // mu: prox of g* via the Moreau shortcut.
    const VectorXd rho = lam.head(M) - c * g.head(M);
    next.segment(a, M) = prox_conjugate(agent.g, rho, c);

    // gamma: plain gradient step with edge multipliers and pi-weighted
    // disagreement toward the intra-cluster neighbors.
    VectorXd gacc = g.segment(M, nM);
    const auto gamma_of = [&](int other) {
        return lambda.segment(asmb_.agent_offset[other] + M, nM);
    };
    const VectorXd gamma = lam.segment(M, nM);
    for (const auto& r : refs.intra_above) {
        gacc -= omega.segment(r.row, nM);
        gacc += pi * (gamma - gamma_of(r.other));
    }
    for (const auto& r : refs.intra_below) {
        gacc += omega.segment(r.row, nM);
        gacc += r.pi * (gamma - gamma_of(r.other));
    }
    next.segment(a + M, nM) = gamma - c * gacc;

    // theta: same pattern over global edges, projected in inequality mode.
    VectorXd tacc = g.tail(B);
    const auto theta_of = [&](int other) {
        const auto& oop = asmb_.ops[other];
        return lambda.segment(asmb_.agent_offset[other] + oop.M + oop.n_i * oop.M, B);
    };
    const VectorXd theta = lam.tail(B);
    for (const auto& r : refs.global_above) {
        tacc -= omega.segment(r.row, B);
        tacc += pi * (theta - theta_of(r.other));
    }
    for (const auto& r : refs.global_below) {
        tacc += omega.segment(r.row, B);
        tacc += r.pi * (theta - theta_of(r.other));
    }
    VectorXd theta_next = theta - c * tacc;
    if (mode_ == CouplingMode::Inequality) theta_next = theta_next.cwiseMax(0.0);
    next.segment(a + M + nM, B) = theta_next;
}

void CdpgSolver::update_edges(const VectorXd& lambda_next, const VectorXd& omega,
                              VectorXd& omega_next) const {
    const VectorXd gaps = consensus_gaps(lambda_next);
    omega_next = omega + asmb_.D_pi.cwiseProduct(gaps);
}

VectorXd CdpgSolver::consensus_gaps(const VectorXd& lambda) const {
    const auto& net = problem_->network();
    VectorXd gaps(asmb_.omega_dim());
    for (const auto& e : asmb_.edges) {
        if (e.intra) {
            const int own = net.relabel(e.cluster, e.owner) - 1;
            const int nb = net.relabel(e.cluster, e.neighbor) - 1;
            const int M = asmb_.ops[own].M;
            gaps.segment(e.row_offset, e.rows) =
                lambda.segment(asmb_.agent_offset[nb] + M, e.rows) -
                lambda.segment(asmb_.agent_offset[own] + M, e.rows);
        } else {
            const auto& oop = asmb_.ops[e.owner - 1];
            const auto& nop = asmb_.ops[e.neighbor - 1];
            gaps.segment(e.row_offset, e.rows) =
                lambda.segment(asmb_.agent_offset[e.neighbor - 1] + nop.M + nop.n_i * nop.M,
                               e.rows) -
                lambda.segment(asmb_.agent_offset[e.owner - 1] + oop.M + oop.n_i * oop.M, e.rows);
        }
    }
    return gaps;
}

double CdpgSolver::consensus_norm(const VectorXd& lambda) const {
    return consensus_gaps(lambda).norm();
}

IterateState CdpgSolver::iterate(const IterateState& state, int workers) const {
    IterateState next;
    next.t = state.t + 1;
    next.lambda.resize(asmb_.dual_dim);
    const int n_agents = static_cast<int>(asmb_.ops.size());
    parallel_for(n_agents, workers,
                 [&](int k) { update_agent(k, state.lambda, state.omega, next.lambda); });
    if (!next.lambda.allFinite()) throw DivergenceError(next.t);
    update_edges(next.lambda, state.omega, next.omega);
    if (!next.omega.allFinite()) throw DivergenceError(next.t);
    return next;
}

VectorXd CdpgSolver::recover_primal_agent(int flat, const VectorXd& lambda_ij) const {
    const auto& op = asmb_.ops[flat];
    const VectorXd linear = lambda_ij.head(op.M) +
                            op.L_col.transpose() * lambda_ij.segment(op.M, op.n_i * op.M) +
                            op.A_slice.transpose() * lambda_ij.tail(op.B);
    return problem_->agents()[flat].f.conjugate_argmax(-linear);
}

VectorXd CdpgSolver::recover_primal(const VectorXd& lambda) const {
    const int M = problem_->M();
    VectorXd y(static_cast<Eigen::Index>(asmb_.ops.size()) * M);
    for (size_t k = 0; k < asmb_.ops.size(); ++k)
        y.segment(static_cast<Eigen::Index>(k) * M, M) = recover_primal_agent(
            static_cast<int>(k), lambda.segment(asmb_.agent_offset[k], asmb_.ops[k].dim()));
    return y;
}

VectorXd CdpgSolver::cluster_means(const VectorXd& primal_agents) const {
    const auto& net = problem_->network();
    const int M = problem_->M();
    VectorXd x = VectorXd::Zero(static_cast<Eigen::Index>(net.n_clusters()) * M);
    for (int i = 1; i <= net.n_clusters(); ++i) {
        const int n = net.cluster(i).n_agents;
        for (int j = 1; j <= n; ++j)
            x.segment((i - 1) * M, M) +=
                primal_agents.segment((net.relabel(i, j) - 1) * M, M) / n;
    }
    return x;
}

double CdpgSolver::phi(const VectorXd& lambda) const {
    double total = 0;
    for (size_t k = 0; k < asmb_.ops.size(); ++k) {
        const auto& op = asmb_.ops[k];
        const VectorXd lam = lambda.segment(asmb_.agent_offset[k], op.dim());
        const auto& agent = problem_->agents()[k];
        total += agent.f.conjugate_value(op.H * lam) + op.kappa_eta_b.dot(lam.tail(op.B));
        total += agent.g.conjugate_value(lam.head(op.M));
        if (mode_ == CouplingMode::Inequality &&
            (lam.tail(op.B).array() < -kIndicatorTol).any())
            return std::numeric_limits<double>::infinity();
    }
    return total;
}

Metrics CdpgSolver::metrics(const IterateState& state,
                            std::optional<double> reference_objective) const {
    Metrics m;
    const VectorXd gaps = consensus_gaps(state.lambda);
    m.consensus_residual = gaps.norm();

    double pq = 0;
    for (size_t k = 0; k < asmb_.ops.size(); ++k) {
        const auto& op = asmb_.ops[k];
        const VectorXd lam = state.lambda.segment(asmb_.agent_offset[k], op.dim());
        const auto& agent = problem_->agents()[k];
        pq += agent.f.conjugate_value(op.H * lam) + op.kappa_eta_b.dot(lam.tail(op.B));
        pq += agent.g.conjugate_value(lam.head(op.M));
        if (mode_ == CouplingMode::Inequality &&
            (lam.tail(op.B).array() < -kIndicatorTol).any())
            m.indicator_violated = true;
    }
    m.lagrangian = pq + 0.5 * gaps.dot(asmb_.D_pi.cwiseProduct(gaps)) + state.omega.dot(gaps);
    if (m.indicator_violated) m.lagrangian = std::numeric_limits<double>::infinity();

    if (reference_objective) {
        if (*reference_objective == 0.0) {
            m.rel_error = std::abs(m.lagrangian);
            m.rel_error_is_absolute = true;
        } else {
            m.rel_error = std::abs((m.lagrangian - *reference_objective) / *reference_objective);
        }
    }
    m.primal = recover_primal(state.lambda);
    m.cluster_primal = cluster_means(m.primal);
    return m;
}

RunResult CdpgSolver::run(const SolverConfig& config) {
    if (config.max_iters < 1) throw ValidationError("max_iters must be >= 1");
    if (config.tol <= 0) throw ValidationError("tol must be positive");
    if (config.record_every < 1) throw ValidationError("record_every must be >= 1");

    const CouplingMode saved = mode_;
    if (config.mode_override) mode_ = *config.mode_override;

    const auto t_start = std::chrono::steady_clock::now();
    RunResult out;
    IterateState state = initial_state(config.lambda0, config.omega0);
    ErgodicAverage avg;
    std::deque<VectorXd> primal_window;

    auto record = [&](const IterateState& s) {
        TraceRecord rec;
        rec.t = s.t;
        rec.metrics = metrics(s, config.reference_objective);
        rec.lambda_bar = avg.mean();
        rec.z_lambda_bar_norm = consensus_norm(rec.lambda_bar);
        out.trace.records.push_back(std::move(rec));
    };

    try {
        for (long t = 0; t < config.max_iters; ++t) {
            const VectorXd lambda_prev = state.lambda;
            state = iterate(state, config.workers);
            avg.add(state.lambda);

            const VectorXd primal = cluster_means(recover_primal(state.lambda));
            primal_window.push_back(primal);
            if (static_cast<long>(primal_window.size()) > kPrimalWindow + 1)
                primal_window.pop_front();

            const bool final_iter = state.t == config.max_iters;
            if (state.t % config.record_every == 0) record(state);

            bool stop = false;
            if (static_cast<long>(primal_window.size()) == kPrimalWindow + 1) {
                const double change =
                    (primal_window.back() - primal_window.front()).lpNorm<Eigen::Infinity>();
                // The recovered primal sees lambda only through H, so it can
                // plateau while lambda still drifts along null(H); the dual
                // change guard keeps such plateaus from stopping the run.
                const double dual_change =
                    (state.lambda - lambda_prev).lpNorm<Eigen::Infinity>();
                if (change <= config.tol && dual_change <= config.tol &&
                    consensus_norm(state.lambda) <= config.tol)
                    stop = true;
            }
            if (stop || final_iter) {
                if (state.t % config.record_every != 0) record(state);
                out.converged = stop;
                break;
            }
        }
    } catch (...) {
        mode_ = saved;
        throw;
    }
    mode_ = saved;

    out.state = state;
    out.lambda_bar = avg.mean();
    out.primal_agents = recover_primal(state.lambda);
    out.primal = cluster_means(out.primal_agents);
    out.iterations = state.t;
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

}  // namespace cdpg
