#pragma once

#include <Eigen/Core>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "betatneh/data.hpp"
#include "betatneh/lbfgsb.hpp"
#include "betatneh/life_table.hpp"
#include "betatneh/likelihood.hpp"
#include "betatneh/model.hpp"

namespace betatneh {

struct FitResult {
    ParamVector theta;
    Eigen::VectorXd theta_flat;
    std::vector<std::string> parameter_names;
    Eigen::MatrixXd covariance;  // n^{-1} I_hat^{-1}; empty when unavailable
    bool cov_available = false;
    Eigen::VectorXd se;          // NaN entries when unavailable
    double loglik = 0.0;
    double aic = 0.0;
    std::vector<bool> boundary_hits;  // per flattened parameter
    int expansions_performed = 0;
    bool converged = false;
    std::string message;
    BoxBounds final_bounds;
    ModelSpec spec;  // designs echoed for downstream prediction
    int n = 0;
    int n_events = 0;

    bool any_boundary_hit() const;
    /// Names of parameters sitting on a bound after the expansion protocol.
    std::vector<std::string> boundary_parameter_names() const;
};

/// Box bounds resolved from spec overrides plus the data-driven defaults:
/// gamma in [-10, 10], beta in [1 + 1e-6, 30], tau-intercept in
/// [0.1, 1.5 * max observed time], remaining eta in +/- the tau upper bound.
BoxBounds resolve_bounds(const ModelSpec& spec, const Dataset& data);

/// Initial point from spec overrides plus defaults: gamma = (1, 0, ...),
/// beta = 2, eta = (2 * median event time, 0, ...), clamped inside the box.
Eigen::VectorXd resolve_init(const ModelSpec& spec, const Dataset& data,
                             const BoxBounds& box);

/// Maximum-likelihood fit with the boundary-expansion protocol: when an
/// estimate lands within 1e-6 of the box width of a bound, that bound is
/// widened (factor 2; tau-intercept upper bound +50% up to its cap) and the
/// fit restarts, up to max_expansions times. Remaining hits are flagged.
FitResult fit(const Dataset& data, const ModelSpec& spec, const PopHazardSource& pop);
FitResult fit(const Dataset& data, const ModelSpec& spec, const PopHazardSource& pop,
              const Eigen::VectorXd& init_flat);

struct CiResult {
    double estimate;
    double se;
    double lower;
    double upper;
    bool valid;  // false when the fit carries boundary hits or no covariance
};

/// Wald interval for a smooth scalar g(theta) via the delta method; the
/// gradient uses central differences with relative step 1e-5.
CiResult delta_method_ci(const FitResult& fit,
                         const std::function<double(const Eigen::VectorXd&)>& g,
                         double level);

/// Covariate profile: values by covariate name; "intercept" is implicit.
using Profile = std::map<std::string, double>;

/// Cure fraction exp(-tau(z) B(alpha(z), beta)) with delta-method CI,
/// clamped into [0,1].
CiResult cure_fraction_ci(const FitResult& fit, const Profile& z, double level);

/// tau(z), linear in eta, so the standard error is exact from the covariance.
CiResult tneh_ci(const FitResult& fit, const Profile& z, double level);

/// Net survival at (t, z) with delta-method CI, clamped into [0,1].
CiResult net_survival_ci(const FitResult& fit, double t, const Profile& z,
                         double level);

double alpha_at_profile(const FitResult& fit, const Profile& z);
double tau_at_profile(const FitResult& fit, const Profile& z);

struct IdentifiabilityReport {
    bool ok;
    int alpha_rank, alpha_cols;
    int tau_rank, tau_cols;
    std::string details;
};

/// Numerical column-rank check (SVD, relative tolerance 1e-10) of both
/// design matrices over the observed covariates. Rank deficiency is a
/// warning, not an error.
IdentifiabilityReport check_identifiability(const Dataset& data, const ModelSpec& spec);

struct SweepEntry {
    Eigen::VectorXd init;
    Eigen::VectorXd estimate;  // empty when failed
    double loglik = 0.0;
    bool ok = false;
    std::string message;
};

struct SweepReport {
    std::vector<SweepEntry> entries;
    std::vector<std::string> parameter_names;
    Eigen::VectorXd est_min, est_max, est_range;  // over successful fits
    double max_loglik_gap = 0.0;
    int n_failed = 0;
};

/// Initial-value robustness: K starting points drawn uniformly inside the
/// box, one fit each; failures are recorded and skipped in the dispersion
/// summary.
SweepReport initial_value_sweep(const Dataset& data, const ModelSpec& spec,
                                const PopHazardSource& pop, int K,
                                std::uint64_t seed);

}  // namespace betatneh
