#pragma once

#include <Eigen/Core>

#include "betatneh/data.hpp"
#include "betatneh/life_table.hpp"
#include "betatneh/model.hpp"

namespace betatneh {

/// Compiled log-likelihood for one dataset under one design: per-record
/// design rows, floored event times, and population hazards at attained age
/// are fixed up front, so evaluations during optimization touch only theta.
///
/// The population cumulative hazard is a theta-free constant and is dropped
/// from the log-likelihood; include_pop_constant() adds it back for checks
/// that want the full observed-data value.
class LikelihoodProblem {
public:
    LikelihoodProblem(const Dataset& data, const ModelSpec& spec,
                      const PopHazardSource& pop);

    int n() const { return static_cast<int>(t_.size()); }
    int n_gamma() const { return static_cast<int>(za_.cols()); }
    int n_eta() const { return static_cast<int>(zt_.cols()); }
    int k() const { return n_gamma() + 1 + n_eta(); }
    int n_events() const { return n_events_; }

    /// Log-likelihood; -infinity when theta leaves the model domain
    /// (alpha(z) <= 0, tau(z) <= 0, beta <= 1, or a death with zero total
    /// hazard).
    double value(const Eigen::VectorXd& theta_flat) const;
    double value(const ParamVector& theta) const;

    /// Log-likelihood and its analytic gradient (same -infinity sentinel;
    /// gradient content undefined in that case).
    double value_and_gradient(const Eigen::VectorXd& theta_flat,
                              Eigen::VectorXd& grad) const;

    /// Outer-product information estimate: (1/n) * sum over deaths of
    /// v v^T with v = (dlambda_exc/dtheta) / (lambda_pop + lambda_exc).
    Eigen::MatrixXd fisher_information(const Eigen::VectorXd& theta_flat) const;

    const Eigen::VectorXd& pop_hazards() const { return lpop_; }
    /// Sum of per-record population cumulative hazards (the dropped constant).
    double pop_cum_constant() const { return pop_cum_constant_; }

    const Eigen::MatrixXd& alpha_design_matrix() const { return za_; }
    const Eigen::MatrixXd& tau_design_matrix() const { return zt_; }
    const Eigen::VectorXd& floored_times() const { return t_; }

    /// Build one design matrix (columns resolved by name; "intercept" -> 1).
    static Eigen::MatrixXd design_matrix(const Dataset& data,
                                         const std::vector<std::string>& columns);

    /// Per-record population hazard at attained age t_i + a_i.
    static Eigen::VectorXd population_hazards(const Dataset& data,
                                              const PopHazardSource& pop);
    static Eigen::VectorXd population_cum_hazards(const Dataset& data,
                                                  const PopHazardSource& pop);

private:
    Eigen::VectorXd t_;      // floored times
    Eigen::VectorXi delta_;
    Eigen::VectorXd lpop_;
    Eigen::MatrixXd za_, zt_;
    double pop_cum_constant_ = 0.0;
    int n_events_ = 0;
};

}  // namespace betatneh
