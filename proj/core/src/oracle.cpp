#include "cdpg/oracle.hpp"

#include <cmath>
#include <sstream>

namespace cdpg {

namespace {

struct AggregatedPrimal {
    VectorXd lower, upper;  // per-cluster box intersection, N*M
    Eigen::RowVectorXd a;   // single coupling row
    double b = 0;
    CouplingMode mode = CouplingMode::Inequality;
    const CoupledProblem* problem = nullptr;

    double objective(const VectorXd& x) const {
        double total = 0;
        const int M = problem->M();
        for (int i = 1; i <= problem->n_clusters(); ++i) {
            const VectorXd xi = x.segment((i - 1) * M, M);
            for (int j = 1; j <= problem->network().cluster(i).n_agents; ++j) {
                const auto& ag = problem->agent(i, j);
                total += ag.f.eval(xi);
                if (!std::holds_alternative<BoxIndicator>(ag.g.spec())) total += ag.g.eval(xi);
            }
        }
        return total;
    }

    VectorXd gradient(const VectorXd& x) const {
        VectorXd g = VectorXd::Zero(x.size());
        const int M = problem->M();
        for (int i = 1; i <= problem->n_clusters(); ++i) {
            const VectorXd xi = x.segment((i - 1) * M, M);
            for (int j = 1; j <= problem->network().cluster(i).n_agents; ++j) {
                const auto& ag = problem->agent(i, j);
                g.segment((i - 1) * M, M) += ag.f.gradient(xi);
                if (const auto* n = std::get_if<NormPenalty>(&ag.g.spec())) {
                    // Subgradient of weight * ||.||_e.
                    if (n->order == 1)
                        g.segment((i - 1) * M, M) += n->weight * xi.array().sign().matrix();
                    else if (xi.norm() > 0)
                        g.segment((i - 1) * M, M) += n->weight * xi / xi.norm();
                }
            }
        }
        return g;
    }

    /// Euclidean projection onto box intersect {a x <= b} / {a x = b}.
    VectorXd project(const VectorXd& x) const {
        VectorXd clamped = x.cwiseMax(lower).cwiseMin(upper);
        const double val = a.dot(clamped);
        if (mode == CouplingMode::Inequality && val <= b) return clamped;
        if (mode == CouplingMode::Equality && std::abs(val - b) <= 1e-14 * (1 + std::abs(b)))
            return clamped;
        // a^T clamp(x - nu a) is nonincreasing in nu; bisect for the crossing.
        auto shifted = [&](double nu) {
            return a.dot((x - nu * a.transpose()).cwiseMax(lower).cwiseMin(upper));
        };
        double lo = 0, hi = 0, step = 1.0;
        while (shifted(lo) < b) lo -= (step *= 2);
        step = 1.0;
        while (shifted(hi) > b) hi += (step *= 2);
        for (int k = 0; k < 200 && hi - lo > 1e-15 * (1 + std::abs(hi)); ++k) {
            const double mid = 0.5 * (lo + hi);
            (shifted(mid) > b ? lo : hi) = mid;
        }
        const double nu = 0.5 * (lo + hi);
        return (x - nu * a.transpose()).cwiseMax(lower).cwiseMin(upper);
    }
};

AggregatedPrimal aggregate(const CoupledProblem& problem) {
    const int N = problem.n_clusters();
    const int M = problem.M();
    if (N * M > 6)
        throw ValidationError("brute_force_primal supports N*M <= 6 (desk scale)");
    if (problem.B() != 1)
        throw ValidationError("brute_force_primal supports a single coupling row");

    AggregatedPrimal agg;
    agg.problem = &problem;
    agg.mode = problem.mode();
    agg.a = problem.coupling_A().row(0);
    agg.b = problem.coupling_b()(0);
    const double inf = std::numeric_limits<double>::infinity();
    agg.lower = VectorXd::Constant(N * M, -inf);
    agg.upper = VectorXd::Constant(N * M, inf);
    for (int i = 1; i <= N; ++i)
        for (int j = 1; j <= problem.network().cluster(i).n_agents; ++j)
            if (const auto* box = std::get_if<BoxIndicator>(&problem.agent(i, j).g.spec())) {
                agg.lower.segment((i - 1) * M, M) =
                    agg.lower.segment((i - 1) * M, M).cwiseMax(box->lower);
                agg.upper.segment((i - 1) * M, M) =
                    agg.upper.segment((i - 1) * M, M).cwiseMin(box->upper);
            }
    if ((agg.lower.array() > agg.upper.array()).any())
        throw InfeasibilityError("empty box intersection within a cluster");
    // Unboxed coordinates get a wide synthetic search box (desk-scale data).
    agg.lower = agg.lower.cwiseMax(-1e6);
    agg.upper = agg.upper.cwiseMin(1e6);

    // Range of a^T x over the box.
    const double amin =
        (agg.a.transpose().array() * agg.lower.array())
            .min(agg.a.transpose().array() * agg.upper.array())
            .sum();
    const double amax =
        (agg.a.transpose().array() * agg.lower.array())
            .max(agg.a.transpose().array() * agg.upper.array())
            .sum();
    if (agg.mode == CouplingMode::Inequality ? amin > agg.b : (amin > agg.b || amax < agg.b))
        throw InfeasibilityError("coupling constraint unreachable from the box");
    return agg;
}

}  // namespace

ReferenceSolution brute_force_primal(const CoupledProblem& problem) {
    const AggregatedPrimal agg = aggregate(problem);

    bool smooth = true;
    for (const auto& ag : problem.agents())
        if (std::holds_alternative<NormPenalty>(ag.g.spec())) smooth = false;

    VectorXd x = agg.project(0.5 * (agg.lower + agg.upper));
    double best = agg.objective(x);
    VectorXd best_x = x;

    if (smooth) {
        // Fixed step 1/L gives a linear rate on the smooth problems; the
        // curvature bound comes from each oracle's gradient over the box.
        double L = 0;
        const int M = problem.M();
        for (int i = 1; i <= problem.n_clusters(); ++i) {
            double Li = 0;
            const VectorXd lo = agg.lower.segment((i - 1) * M, M);
            const VectorXd hi = agg.upper.segment((i - 1) * M, M);
            for (int j = 1; j <= problem.network().cluster(i).n_agents; ++j) {
                const auto& f = problem.agent(i, j).f;
                if (const auto* q = std::get_if<Quadratic>(&f.spec()))
                    Li += 2.0 * q->a.maxCoeff();
                else if (const auto* e = std::get_if<QuadExp>(&f.spec())) {
                    const double ex = e->e2 >= 0 ? hi.maxCoeff() : lo.minCoeff();
                    Li += 2.0 * e->q2 +
                          e->e1 * e->e2 * e->e2 * std::exp(std::min(e->e2 * ex, 40.0));
                }
            }
            L = std::max(L, Li);
        }
        const double step = 1.0 / std::max(L, 1e-12);
        for (long k = 0; k < 200000; ++k) {
            const VectorXd next = agg.project(x - step * agg.gradient(x));
            const double move = (next - x).lpNorm<Eigen::Infinity>();
            x = next;
            if (move < 1e-14) break;
        }
        best = agg.objective(x);
        best_x = x;
    } else {
        // Diminishing-step projected subgradient, incumbent tracked.
        const double diam = (agg.upper - agg.lower).norm();
        for (long k = 0; k < 1000000; ++k) {
            const VectorXd g = agg.gradient(x);
            const double gn = std::max(g.norm(), 1e-12);
            x = agg.project(x - (0.1 * diam / (gn * std::sqrt(k + 1.0))) * g);
            const double val = agg.objective(x);
            if (val < best) {
                best = val;
                best_x = x;
            }
        }
        x = best_x;
    }

    // Coordinate grid refinement around the incumbent.
    for (double width : {1e-2, 1e-3, 1e-4}) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (Eigen::Index d = 0; d < x.size(); ++d) {
                for (double dir : {-1.0, 1.0}) {
                    VectorXd cand = best_x;
                    cand(d) += dir * width;
                    cand = agg.project(cand);
                    const double val = agg.objective(cand);
                    if (val < best - 1e-15) {
                        best = val;
                        best_x = cand;
                        improved = true;
                    }
                }
            }
        }
    }

    ReferenceSolution out;
    out.x_star = best_x;
    out.objective = problem.objective(best_x);
    out.method = smooth ? "projected-gradient" : "projected-subgradient";
    return out;
}

KktResiduals kkt_residuals(const CdpgSolver& solver, const VectorXd& lambda,
                           const VectorXd& omega) {
    const auto& asmb = solver.assembly();
    const auto& steps = solver.steps();
    const auto& problem = solver.problem();

    VectorXd grad = asmb.Z.transpose() * omega + asmb.ztdz() * lambda;
    for (size_t k = 0; k < asmb.ops.size(); ++k)
        grad.segment(asmb.agent_offset[k], asmb.ops[k].dim()) +=
            solver.grad_p(static_cast<int>(k),
                          lambda.segment(asmb.agent_offset[k], asmb.ops[k].dim()));

    VectorXd prox_point(lambda.size());
    for (size_t k = 0; k < asmb.ops.size(); ++k) {
        const auto& op = asmb.ops[k];
        const int a = asmb.agent_offset[k];
        const double c = steps.c[k];
        const VectorXd v = lambda.segment(a, op.dim()) - c * grad.segment(a, op.dim());
        prox_point.segment(a, op.M) =
            prox_conjugate(problem.agents()[k].g, v.head(op.M), c);
        prox_point.segment(a + op.M, op.n_i * op.M) = v.segment(op.M, op.n_i * op.M);
        prox_point.segment(a + op.M + op.n_i * op.M, op.B) =
            solver.mode() == CouplingMode::Inequality ? v.tail(op.B).cwiseMax(0.0).eval()
                                                      : v.tail(op.B).eval();
    }

    KktResiduals out;
    out.stationarity = (lambda - prox_point).norm();
    out.consensus = solver.consensus_norm(lambda);
    return out;
}

CertificateReport ergodic_rate_certificate(const CdpgSolver& solver, const SolverTrace& trace,
                                       const VectorXd& lambda_star, const VectorXd& omega_star,
                                       const VectorXd& lambda0, const VectorXd& omega0) {
    const auto& asmb = solver.assembly();
    const auto& steps = solver.steps();

    const VectorXd d_inv = asmb.D_pi.cwiseInverse();
    VectorXd s_inv(asmb.dual_dim);
    for (size_t k = 0; k < asmb.ops.size(); ++k)
        s_inv.segment(asmb.agent_offset[k], asmb.ops[k].dim())
            .setConstant(1.0 / steps.c[k]);

    const VectorXd w0 = omega0.size() ? omega0 : VectorXd::Zero(asmb.omega_dim()).eval();
    const VectorXd l0 = lambda0.size() ? lambda0 : VectorXd::Zero(asmb.dual_dim).eval();
    const VectorXd dl = lambda_star - l0;

    CertificateReport rep;
    rep.theta = 4.0 * omega_star.dot(d_inv.cwiseProduct(omega_star)) +
                w0.dot(d_inv.cwiseProduct(w0)) +
                0.5 * (dl.dot(s_inv.cwiseProduct(dl)) - dl.dot(asmb.ztdz() * dl));
    rep.phi_star = solver.phi(lambda_star);
    rep.omega_star_norm = omega_star.norm();

    rep.passed = true;
    for (const auto& rec : trace.records) {
        if (rec.t < 1) continue;
        CertificateCheck chk;
        chk.t = rec.t;
        chk.bound = rep.theta / static_cast<double>(rec.t);
        chk.phi_gap = std::abs(solver.phi(rec.lambda_bar) - rep.phi_star);
        chk.feas_product = rep.omega_star_norm * rec.z_lambda_bar_norm;
        const double slack = 1e-9 * (1.0 + std::abs(chk.bound));
        chk.phi_ok = chk.phi_gap <= chk.bound + slack;
        chk.feas_ok = chk.feas_product <= chk.bound + slack;
        rep.passed = rep.passed && chk.phi_ok && chk.feas_ok;
        rep.residual_rate_constant = std::max(
            rep.residual_rate_constant, static_cast<double>(rec.t) * rec.z_lambda_bar_norm);
        rep.checks.push_back(chk);
    }
    return rep;
}

std::string CertificateReport::to_text() const {
    std::ostringstream os;
    os << "ergodic-rate certificate: Theta = " << theta << ", Phi(lambda*) = " << phi_star
       << ", ||omega*|| = " << omega_star_norm << "\n";
    os << "      T      |Phi gap|   ||w*||*||Z lbar||    Theta/T   status\n";
    for (const auto& c : checks) {
        os << "  " << c.t << "  " << c.phi_gap << "  " << c.feas_product << "  " << c.bound
           << "  " << ((c.phi_ok && c.feas_ok) ? "ok" : "VIOLATED") << "\n";
    }
    os << "max T*||Z lambda_bar^T|| = " << residual_rate_constant << "\n";
    os << (passed ? "certificate PASSED" : "certificate FAILED") << "\n";
    return os.str();
}

}  // namespace cdpg
