#pragma once

#include "cdpg/solver.hpp"

namespace cdpg {

struct InfeasibilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ReferenceSolution {
    VectorXd x_star;      // N*M
    double objective = 0;  // H(x*)
    std::string method;    // "projected-gradient" | "grid" | "closed-form"
};

/// Independent primal solve of the aggregated problem for small instances
/// (N*M <= 6, B = 1): projected gradient with diminishing steps followed by a
/// coordinate grid refinement of width 1e-4 around the incumbent. Feasibility
/// is enforced by projection onto box intersect halfspace/hyperplane.
/// Throws InfeasibilityError when the constraint set is empty.
ReferenceSolution brute_force_primal(const CoupledProblem& problem);

struct KktResiduals {
    double stationarity = 0;  // ||lambda - prox_Q[lambda - S[c] grad L]||
    double consensus = 0;     // ||Z lambda||
};

/// Fixed-point residuals of the saddle-point conditions at (lambda, omega).
KktResiduals kkt_residuals(const CdpgSolver& solver, const VectorXd& lambda,
                           const VectorXd& omega);

struct CertificateCheck {
    long t = 0;
    double phi_gap = 0;        // |Phi(lambda_bar) - Phi(lambda*)|
    double feas_product = 0;   // ||omega*|| ||Z lambda_bar||
    double bound = 0;          // Theta / t
    bool phi_ok = false;
    bool feas_ok = false;
};

struct CertificateReport {
    double theta = 0;
    double phi_star = 0;
    double omega_star_norm = 0;
    std::vector<CertificateCheck> checks;
    bool passed = false;
    /// max over recorded t of t * ||Z lambda_bar^t||; finite and bounded by
    /// Theta / ||omega*|| when the ergodic rate holds.
    double residual_rate_constant = 0;
    std::string to_text() const;
};

/// Numerical certificate of the ergodic O(1/T) bounds: checks
/// |Phi(lambda_bar^T) - Phi(lambda*)| <= Theta/T and
/// ||omega*|| ||Z lambda_bar^T|| <= Theta/T at every recorded iteration,
/// with Theta computed from (lambda*, omega*), the start point and the step
/// sizes actually used by the trace run.
CertificateReport ergodic_rate_certificate(const CdpgSolver& solver, const SolverTrace& trace,
                                       const VectorXd& lambda_star, const VectorXd& omega_star,
                                       const VectorXd& lambda0, const VectorXd& omega0);

}  // namespace cdpg
