#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>

namespace betatneh {

struct BoxBounds {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    void clamp(Eigen::VectorXd& x) const;
    bool contains(const Eigen::VectorXd& x) const;
};

struct LbfgsbOptions {
    int max_iterations = 500;
    double pg_tol = 1e-6;      // projected-gradient sup-norm
    double f_rel_tol = 1e-9;   // relative objective change per iteration
    int history = 10;
};

struct LbfgsbResult {
    Eigen::VectorXd x;
    double f = 0.0;
    Eigen::VectorXd gradient;
    int iterations = 0;
    int n_evaluations = 0;
    bool converged = false;
    std::string message;
};

/// Objective callback: returns f(x) and fills grad (same dimension as x).
/// May return +infinity for infeasible interior points; the line search
/// backtracks on non-finite values and the gradient is then ignored.
using ObjectiveFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Bound-constrained limited-memory quasi-Newton minimization
/// (projected-gradient Cauchy point, subspace step over the free variables,
/// strong-Wolfe line search). Estimates land exactly on active bounds.
LbfgsbResult lbfgsb_minimize(const ObjectiveFn& fn, const Eigen::VectorXd& x0,
                             const BoxBounds& bounds, const LbfgsbOptions& opts = {});

}  // namespace betatneh
