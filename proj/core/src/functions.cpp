#include "cdpg/functions.hpp"

#include "cdpg/graph.hpp"  // ValidationError

#include <cmath>

namespace cdpg {

namespace {

constexpr double kIndicatorSlack = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

VectorXd broadcast(const VectorXd& v, int dim, const char* what) {
    if (v.size() == dim) return v;
    if (v.size() == 1) return VectorXd::Constant(dim, v(0));
    throw ValidationError(std::string(what) + ": parameter length " + std::to_string(v.size()) +
                          " does not match block dimension " + std::to_string(dim));
}

}  // namespace

double solve_increasing(const std::function<double(double)>& h, double target, double guess) {
    double lo = guess, hi = guess;
    double step = 1.0;
    int iters = 0;
    while (h(lo) > target) {
        lo -= step;
        step *= 2;
        if (++iters > 200) throw NumericalError("root bracket expansion failed", h(lo) - target);
    }
    step = 1.0;
    while (h(hi) < target) {
        hi += step;
        step *= 2;
        if (++iters > 200) throw NumericalError("root bracket expansion failed", h(hi) - target);
    }
    for (int k = 0; k < 200 && hi - lo > 1e-12; ++k) {
        double mid = 0.5 * (lo + hi);
        (h(mid) < target ? lo : hi) = mid;
    }
    double root = 0.5 * (lo + hi);
    if (hi - lo > 1e-12)
        throw NumericalError("bisection did not reach tolerance", h(root) - target);
    return root;
}

// ---------------------------------------------------------------------------
// SmoothConvexOracle
// ---------------------------------------------------------------------------

SmoothConvexOracle::SmoothConvexOracle(FunctionSpec spec, int dim)
    : spec_(std::move(spec)), dim_(dim), sigma_(0) {
    if (auto* q = std::get_if<Quadratic>(&spec_)) {
        q->a = broadcast(q->a, dim, "Quadratic.a");
        q->b = broadcast(q->b, dim, "Quadratic.b");
        if ((q->a.array() <= 0).any())
            throw ValidationError("Quadratic requires strictly positive curvature");
        sigma_ = 2.0 * q->a.minCoeff();
    } else if (auto* e = std::get_if<QuadExp>(&spec_)) {
        if (e->q2 <= 0) throw ValidationError("QuadExp requires positive quadratic curvature");
        if (e->e1 < 0) throw ValidationError("QuadExp requires nonnegative exponential weight");
        // The exponential term only adds curvature; the quadratic part alone
        // certifies strong convexity.
        sigma_ = 2.0 * e->q2;
    } else {
        throw ValidationError("smooth oracle requires a Quadratic or QuadExp spec");
    }
}

double SmoothConvexOracle::eval(const VectorXd& u) const {
    if (const auto* q = std::get_if<Quadratic>(&spec_))
        return (q->a.array() * u.array().square() + q->b.array() * u.array()).sum();
    const auto& e = std::get<QuadExp>(spec_);
    return (e.q2 * u.array().square() + e.q1 * u.array() + e.e1 * (e.e2 * u.array()).exp()).sum();
}

VectorXd SmoothConvexOracle::gradient(const VectorXd& u) const {
    if (const auto* q = std::get_if<Quadratic>(&spec_))
        return 2.0 * q->a.array() * u.array() + q->b.array();
    const auto& e = std::get<QuadExp>(spec_);
    return 2.0 * e.q2 * u.array() + e.q1 + e.e1 * e.e2 * (e.e2 * u.array()).exp();
}

VectorXd SmoothConvexOracle::conjugate_argmax(const VectorXd& v) const {
    if (const auto* q = std::get_if<Quadratic>(&spec_))
        return (v.array() - q->b.array()) / (2.0 * q->a.array());
    const auto& e = std::get<QuadExp>(spec_);
    VectorXd u(v.size());
    for (Eigen::Index m = 0; m < v.size(); ++m) {
        auto deriv = [&](double x) { return 2 * e.q2 * x + e.q1 + e.e1 * e.e2 * std::exp(e.e2 * x); };
        u(m) = solve_increasing(deriv, v(m), (v(m) - e.q1) / (2 * e.q2));
    }
    return u;
}

double SmoothConvexOracle::conjugate_value(const VectorXd& v) const {
    VectorXd u = conjugate_argmax(v);
    return v.dot(u) - eval(u);
}

// ---------------------------------------------------------------------------
// ProxOracle
// ---------------------------------------------------------------------------

ProxOracle::ProxOracle(FunctionSpec spec, int dim) : spec_(std::move(spec)), dim_(dim) {
    if (auto* b = std::get_if<BoxIndicator>(&spec_)) {
        b->lower = broadcast(b->lower, dim, "BoxIndicator.lower");
        b->upper = broadcast(b->upper, dim, "BoxIndicator.upper");
        if ((b->lower.array() > b->upper.array()).any())
            throw ValidationError("BoxIndicator requires lower <= upper");
    } else if (auto* n = std::get_if<NormPenalty>(&spec_)) {
        if (n->order != 1 && n->order != 2)
            throw ValidationError("NormPenalty order must be 1 or 2");
        if (n->weight < 0) throw ValidationError("NormPenalty weight must be nonnegative");
    } else if (!std::holds_alternative<Zero>(spec_)) {
        throw ValidationError("prox oracle requires a BoxIndicator, NormPenalty or Zero spec");
    }
}

VectorXd ProxOracle::prox(const VectorXd& v, double alpha) const {
    if (alpha <= 0) throw ValidationError("prox requires alpha > 0");
    if (const auto* b = std::get_if<BoxIndicator>(&spec_))
        return v.cwiseMax(b->lower).cwiseMin(b->upper);
    if (const auto* n = std::get_if<NormPenalty>(&spec_)) {
        const double t = alpha * n->weight;
        if (n->order == 1)
            return v.array().sign() * (v.array().abs() - t).max(0.0);
        const double nv = v.norm();
        return nv <= t ? VectorXd::Zero(v.size()).eval() : ((1.0 - t / nv) * v).eval();
    }
    return v;  // Zero
}

double ProxOracle::eval(const VectorXd& v) const {
    if (const auto* b = std::get_if<BoxIndicator>(&spec_)) {
        const bool inside = (v.array() >= b->lower.array() - kIndicatorSlack).all() &&
                            (v.array() <= b->upper.array() + kIndicatorSlack).all();
        return inside ? 0.0 : kInf;
    }
    if (const auto* n = std::get_if<NormPenalty>(&spec_))
        return n->weight * (n->order == 1 ? v.lpNorm<1>() : v.norm());
    return 0.0;
}

double ProxOracle::conjugate_value(const VectorXd& mu) const {
    if (const auto* b = std::get_if<BoxIndicator>(&spec_)) {
        // sup_{x in box} mu^T x, separable.
        return (mu.array() * b->lower.array()).max(mu.array() * b->upper.array()).sum();
    }
    if (const auto* n = std::get_if<NormPenalty>(&spec_)) {
        // Indicator of the dual-norm ball of radius weight.
        const double dual = n->order == 1 ? mu.lpNorm<Eigen::Infinity>() : mu.norm();
        return dual <= n->weight + kIndicatorSlack ? 0.0 : kInf;
    }
    // Zero: conjugate is the indicator of the origin.
    return mu.lpNorm<Eigen::Infinity>() <= kIndicatorSlack ? 0.0 : kInf;
}

VectorXd prox_conjugate(const ProxOracle& g, const VectorXd& v, double c) {
    if (c <= 0) throw ValidationError("prox_conjugate requires c > 0");
    return v - c * g.prox(v / c, 1.0 / c);
}

}  // namespace cdpg
