#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>

namespace cdpg {

using Eigen::VectorXd;

struct NumericalError : std::runtime_error {
    double residual = std::numeric_limits<double>::quiet_NaN();
    NumericalError(const std::string& msg, double res)
        : std::runtime_error(msg + " (residual " + std::to_string(res) + ")"), residual(res) {}
};

// ---------------------------------------------------------------------------
// Concrete function descriptions. All act componentwise on R^M blocks;
// scalar parameters broadcast.
// ---------------------------------------------------------------------------

/// f(u) = sum_m a_m u_m^2 + b_m u_m, a > 0.
struct Quadratic {
    VectorXd a;
    VectorXd b;
};

/// f(u) = sum_m q2 u_m^2 + q1 u_m + e1 exp(e2 u_m), q2 > 0, e1 >= 0.
struct QuadExp {
    double q2 = 0;
    double q1 = 0;
    double e1 = 0;
    double e2 = 0;
};

/// Indicator of the box [lower, upper].
struct BoxIndicator {
    VectorXd lower;
    VectorXd upper;
};

/// weight * ||u||_e, e in {1, 2}.
struct NormPenalty {
    int order = 1;
    double weight = 1.0;
};

struct Zero {};

using FunctionSpec = std::variant<Quadratic, QuadExp, BoxIndicator, NormPenalty, Zero>;

// ---------------------------------------------------------------------------
// Smooth strongly convex oracle (the f_ij side).
// ---------------------------------------------------------------------------

class SmoothConvexOracle {
  public:
    /// spec must be Quadratic or QuadExp; dim is the block dimension M.
    SmoothConvexOracle(FunctionSpec spec, int dim);

    double eval(const VectorXd& u) const;
    VectorXd gradient(const VectorXd& u) const;
    /// argmax_u v^T u - f(u) = grad f*(v); unique by strong convexity.
    VectorXd conjugate_argmax(const VectorXd& v) const;
    /// f*(v) = v^T u* - f(u*).
    double conjugate_value(const VectorXd& v) const;
    double sigma() const { return sigma_; }
    int dim() const { return dim_; }
    const FunctionSpec& spec() const { return spec_; }

  private:
    FunctionSpec spec_;
    int dim_;
    double sigma_;
};

// ---------------------------------------------------------------------------
// Nonsmooth prox oracle (the g_ij side).
// ---------------------------------------------------------------------------

class ProxOracle {
  public:
    /// spec must be BoxIndicator, NormPenalty or Zero.
    ProxOracle(FunctionSpec spec, int dim);

    /// prox^alpha_g(v) = argmin_u g(u) + ||u - v||^2 / (2 alpha).
    VectorXd prox(const VectorXd& v, double alpha) const;
    /// g(v); +inf outside an indicator's set (1e-9 slack).
    double eval(const VectorXd& v) const;
    /// g*(mu); +inf outside the conjugate's domain (1e-9 slack).
    double conjugate_value(const VectorXd& mu) const;
    int dim() const { return dim_; }
    const FunctionSpec& spec() const { return spec_; }

  private:
    FunctionSpec spec_;
    int dim_;
};

/// prox^c_{g*}(v) = v - c prox^{1/c}_g(v/c)  (extended Moreau decomposition).
VectorXd prox_conjugate(const ProxOracle& g, const VectorXd& v, double c);

/// Solves h(u) = target for strictly increasing h by bracket expansion and
/// bisection to 1e-12 interval width; throws NumericalError past 200 steps.
double solve_increasing(const std::function<double(double)>& h, double target, double guess);

}  // namespace cdpg
