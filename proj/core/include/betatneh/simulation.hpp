#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "betatneh/data.hpp"
#include "betatneh/fit.hpp"
#include "betatneh/life_table.hpp"
#include "betatneh/model.hpp"
#include "betatneh/rng.hpp"

namespace betatneh {

struct StudyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AgeInterval {
    double lo;
    double hi;      // draws are uniform on [lo, hi)
    double weight;  // mixture weight; weights sum to 1
};

/// Data-generating configuration: true parameters for the single
/// standardized-age covariate model, the age mixture, the analytic
/// population hazard, and the administrative follow-up cap.
struct SimulationConfig {
    ParamVector true_theta;  // gamma = (g0, g1), eta = (e0, e1) on (1, a*)
    std::vector<AgeInterval> ages;
    WeibullPopHazard pop{75.0, 11.0};
    double max_followup = 15.0;
    int n = 0;
    std::uint64_t seed = 0;

    void validate() const;
    /// Analytic mean and standard deviation of the age mixture; these (not
    /// per-sample moments) standardize the age covariate so that the true
    /// parameters keep their meaning across replications.
    std::pair<double, double> age_moments() const;
};

/// Built-in generating configurations (n and seed left for the caller):
/// 1: low excess hazard, short time-to-null, heavy censoring;
/// 2: high excess hazard, moderate time-to-null, light censoring;
/// 3: low excess hazard, long time-to-null, 25-year follow-up.
SimulationConfig setting_config(int which);

struct AgeDraw {
    double age;
    double standardized;
};
AgeDraw draw_age(const SimulationConfig& config, Rng& rng);

/// Latent all-cause time from S_obs(t|a) = exp(-H_pop(a,t) - Lambda_exc(t))
/// by inverse-transform sampling: solves H_pop(a,t) + Lambda_exc(t) = -ln U
/// by bisection (relative tolerance 1e-10). Returns the solver horizon
/// 120 - a when even that cumulative hazard cannot reach -ln U.
double draw_event_time(double age, double alpha, double tau, double beta,
                       const WeibullPopHazard& pop, Rng& rng);

/// n records with t = min(X, max_followup), status = 1 iff X < max_followup,
/// covariate column "a_star". Bitwise reproducible from config.seed.
Dataset simulate_dataset(const SimulationConfig& config);

struct ParameterStats {
    std::string name;
    double true_value;
    double mean;
    double sd;
    double mean_se;
    double coverage;  // Wald 1.96 intervals
};

struct StudyReport {
    std::vector<ParameterStats> parameters;
    int replications = 0;  // requested B
    int n_used = 0;        // converged fits with usable standard errors
    int n_failed = 0;
    double censoring_rate = 0.0;  // empirical mean over replications
    int n = 0;

    /// Per-replication estimates (n_used rows) in flattened parameter order.
    Eigen::MatrixXd estimates;
    Eigen::MatrixXd standard_errors;
};

/// Monte Carlo study: B replications with per-replication seeds derived from
/// config.seed XOR the 1-based replication index (decorrelated through
/// splitmix64 inside Rng). Replications that fail to converge are excluded
/// and counted; more than 20% failures aborts with StudyError. `jobs`
/// replications run concurrently; aggregation is by replication index, so
/// results do not depend on scheduling.
StudyReport run_study(const SimulationConfig& config, int B, const ModelSpec& spec,
                      int jobs = 1);

/// The default model specification for study fits: designs
/// (intercept, a_star) for both alpha and tau, data-driven default bounds.
ModelSpec study_model_spec();

}  // namespace betatneh
