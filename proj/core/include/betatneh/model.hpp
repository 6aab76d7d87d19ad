#pragma once

#include <Eigen/Core>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace betatneh {

/// Raised when evaluated predictors violate the model domain
/// (alpha(z) <= 0 or tau(z) <= 0).
struct InvalidParameterError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Raised when a hazard gradient is requested exactly at t = 0 or t = tau,
/// where the piecewise gradient is undefined. Callers perturb by 1e-12*tau.
struct BoundaryGradientError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Full parameter vector theta = (gamma, beta, eta):
/// gamma drives alpha(z), eta drives tau(z), beta_shape is the shared
/// second shape parameter (> 1 so the hazard closes continuously at tau).
struct ParamVector {
    Eigen::VectorXd gamma;
    double beta_shape = 2.0;
    Eigen::VectorXd eta;

    int size() const { return static_cast<int>(gamma.size() + 1 + eta.size()); }

    /// Flattened layout: [gamma..., beta, eta...].
    Eigen::VectorXd flatten() const;
    static ParamVector from_flat(const Eigen::VectorXd& v, int n_gamma, int n_eta);
};

struct Interval {
    double lo;
    double hi;
};

struct OptimizerSettings {
    int max_iterations = 500;
    double pg_tol = 1e-6;        // projected-gradient sup-norm
    double f_rel_tol = 1e-9;     // relative objective change
    int max_expansions = 5;
    double bound_hit_rel_tol = 1e-6;  // fraction of box width
    double tau_intercept_upper_cap =
        std::numeric_limits<double>::infinity();  // cap for tau-intercept expansion
    int history = 10;
};

/// Covariate design for alpha(z;gamma) and tau(z;eta) plus the optimizer box.
/// Design entries are covariate column names; "intercept" is reserved and
/// must be present in both designs. Bounds and initial values are keyed by
/// parameter name ("gamma.<col>", "beta", "eta.<col>"); anything not given
/// falls back to data-driven defaults at fit time.
struct ModelSpec {
    std::vector<std::string> alpha_design{"intercept"};
    std::vector<std::string> tau_design{"intercept"};
    std::map<std::string, Interval> bounds;
    std::map<std::string, double> init;
    OptimizerSettings optimizer;

    std::vector<std::string> parameter_names() const;
    int n_parameters() const {
        return static_cast<int>(alpha_design.size() + 1 + tau_design.size());
    }
    void validate() const;  // throws std::invalid_argument
};

/// gamma.z over the alpha design row (z aligned with gamma, intercept included).
double alpha_of(std::span<const double> z, const Eigen::VectorXd& gamma);

/// eta.z over the tau design row.
double tau_of(std::span<const double> z, const Eigen::VectorXd& eta);

// ---------------------------------------------------------------------------
// Scalar hazard kernel at evaluated predictors (alpha, tau, beta).
// ---------------------------------------------------------------------------

/// Excess hazard (t/tau)^(alpha-1) (1-t/tau)^(beta-1) on [0, tau], 0 beyond.
/// At t = 0 with alpha < 1 the hazard is +infinity; the infinite value is
/// returned rather than thrown.
double excess_hazard(double t, double alpha, double tau, double beta);

/// Cumulative excess hazard tau * B(alpha,beta) * F_Be(min(t,tau)/tau; alpha,beta).
double cum_excess_hazard(double t, double alpha, double tau, double beta);

/// exp(-cumulative excess hazard); 1 at t = 0, plateaus at the cure fraction.
double net_survival(double t, double alpha, double tau, double beta);

/// Cure fraction exp(-tau * B(alpha, beta)) = net survival plateau.
double cure_fraction(double alpha, double tau, double beta);

/// Net survival through the non-mixture cure form pi^(F_Be(t/tau)); equals
/// net_survival to within 1e-12 and exists as an independent algebraic route.
double nmcm_net_survival(double t, double alpha, double tau, double beta);

/// Partials of the excess hazard in (alpha, tau, beta) at 0 < t < tau;
/// zero vector for t > tau; throws BoundaryGradientError at t = 0 or t = tau.
struct HazardGradient {
    double d_alpha;
    double d_tau;
    double d_beta;
};
HazardGradient excess_hazard_gradient(double t, double alpha, double tau, double beta);

/// Partials of the cumulative excess hazard in (alpha, tau, beta).
struct CumHazardGradient {
    double d_alpha;
    double d_tau;
    double d_beta;
};
CumHazardGradient cum_excess_hazard_gradient(double t, double alpha, double tau,
                                             double beta);

/// One-pass evaluation of hazard, cumulative hazard and both gradients,
/// sharing the incomplete-beta series work. Used by the likelihood loop.
struct HazardEval {
    double lambda;
    double cum;
    HazardGradient dlambda;
    CumHazardGradient dcum;
};
HazardEval eval_hazard_full(double t, double alpha, double tau, double beta);

}  // namespace betatneh
