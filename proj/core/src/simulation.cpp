#include "betatneh/simulation.hpp"

#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "betatneh/special_functions.hpp"

namespace betatneh {

void SimulationConfig::validate() const {
    if (n <= 0) throw StudyError("simulation: n must be positive");
    if (!(max_followup > 0.0)) throw StudyError("simulation: max_followup must be > 0");
    if (ages.empty()) throw StudyError("simulation: no age intervals");
    double wsum = 0.0;
    for (const auto& iv : ages) {
        if (!(iv.lo <= iv.hi)) throw StudyError("simulation: age interval with lo > hi");
        if (iv.weight < 0.0) throw StudyError("simulation: negative mixture weight");
        wsum += iv.weight;
    }
    if (std::fabs(wsum - 1.0) > 1e-9) {
        throw StudyError("simulation: mixture weights must sum to 1");
    }
    for (std::size_t i = 0; i + 1 < ages.size(); ++i) {
        if (ages[i].hi > ages[i + 1].lo + 1e-12) {
            throw StudyError("simulation: age intervals must not overlap");
        }
    }
    if (true_theta.gamma.size() != 2 || true_theta.eta.size() != 2) {
        throw StudyError("simulation: true_theta must have gamma and eta of length 2");
    }
}

std::pair<double, double> SimulationConfig::age_moments() const {
    double mu = 0.0, e2 = 0.0;
    for (const auto& iv : ages) {
        const double m = 0.5 * (iv.lo + iv.hi);
        const double v = (iv.hi - iv.lo) * (iv.hi - iv.lo) / 12.0;
        mu += iv.weight * m;
        e2 += iv.weight * (v + m * m);
    }
    return {mu, std::sqrt(e2 - mu * mu)};
}

SimulationConfig setting_config(int which) {
    SimulationConfig c;
    c.pop = WeibullPopHazard{75.0, 11.0};
    auto theta = [](double g0, double g1, double b, double e0, double e1) {
        ParamVector p;
        p.gamma = Eigen::Vector2d(g0, g1);
        p.beta_shape = b;
        p.eta = Eigen::Vector2d(e0, e1);
        return p;
    };
    switch (which) {
        case 1:
            c.true_theta = theta(2.3, -0.1, 4.8, 5.5, 0.9);
            c.ages = {{20, 40, 0.36}, {40, 65, 0.29}, {65, 80, 0.35}};
            c.max_followup = 15.0;
            break;
        case 2:
            c.true_theta = theta(1.25, -0.05, 3.5, 9.0, 0.3);
            c.ages = {{20, 50, 0.15}, {50, 70, 0.60}, {70, 80, 0.25}};
            c.max_followup = 15.0;
            break;
        case 3:
            c.true_theta = theta(3.01, -0.2, 2.98, 18.0, 1.2);
            c.ages = {{20, 40, 0.36}, {40, 65, 0.29}, {65, 80, 0.35}};
            c.max_followup = 25.0;
            break;
        default:
            throw StudyError("unknown setting " + std::to_string(which) +
                             " (expected 1, 2 or 3)");
    }
    return c;
}

AgeDraw draw_age(const SimulationConfig& config, Rng& rng) {
    const double pick = rng.uniform();
    double acc = 0.0;
    const AgeInterval* chosen = &config.ages.back();
    for (const auto& iv : config.ages) {
        acc += iv.weight;
        if (pick < acc) {
            chosen = &iv;
            break;
        }
    }
    const double age = rng.uniform(chosen->lo, chosen->hi);
    const auto [mu, sd] = config.age_moments();
    return {age, sd > 0.0 ? (age - mu) / sd : 0.0};
}

double draw_event_time(double age, double alpha, double tau, double beta,
                       const WeibullPopHazard& pop, Rng& rng) {
    const double target = -std::log(rng.uniform());
    const double horizon = 120.0 - age;
    const double log_b = special::log_beta(alpha, beta);
    const double b_ab = std::exp(log_b);
    const auto cum_obs = [&](double t) {
        const double u = std::min(t / tau, 1.0);
        return pop.cum_hazard(age, t) +
               tau * b_ab * special::inc_beta_reg(u, alpha, beta);
    };
    if (!(cum_obs(horizon) >= target)) return horizon;
    double lo = 0.0, hi = horizon;
    for (int it = 0; it < 200 && (hi - lo) > 1e-10 * std::max(1.0, lo); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cum_obs(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

Dataset simulate_dataset(const SimulationConfig& config) {
    config.validate();
    Rng rng(config.seed);
    const auto& th = config.true_theta;
    std::vector<SurvivalRecord> records;
    records.reserve(config.n);
    for (int i = 0; i < config.n; ++i) {
        const AgeDraw a = draw_age(config, rng);
        const double alpha = th.gamma(0) + th.gamma(1) * a.standardized;
        const double tau = th.eta(0) + th.eta(1) * a.standardized;
        if (!(alpha > 0.0) || !(tau > 0.0)) {
            throw StudyError("simulation: true theta gives alpha or tau <= 0 at age " +
                             std::to_string(a.age));
        }
        const double x =
            draw_event_time(a.age, alpha, tau, th.beta_shape, config.pop, rng);
        SurvivalRecord r;
        r.time = std::min(x, config.max_followup);
        r.status = x < config.max_followup ? 1 : 0;
        r.age = a.age;
        r.covariates = {a.standardized};
        records.push_back(std::move(r));
    }
    return Dataset({"a_star"}, std::move(records));
}

ModelSpec study_model_spec() {
    ModelSpec spec;
    spec.alpha_design = {"intercept", "a_star"};
    spec.tau_design = {"intercept", "a_star"};
    return spec;
}

StudyReport run_study(const SimulationConfig& config, int B, const ModelSpec& spec,
                      int jobs) {
    if (B < 2) throw StudyError("run_study: B must be >= 2");
    config.validate();
    const int k = spec.n_parameters();

    struct RepOutcome {
        Eigen::VectorXd est;
        Eigen::VectorXd se;
        double censoring = 0.0;
        bool ok = false;
        std::string message;
    };
    std::vector<RepOutcome> reps(B);

    std::atomic<int> next{0};
    const auto worker = [&]() {
        for (;;) {
            const int b = next.fetch_add(1);
            if (b >= B) return;
            RepOutcome& rep = reps[b];
            try {
                SimulationConfig c = config;
                c.seed = config.seed ^ static_cast<std::uint64_t>(b + 1);
                const Dataset ds = simulate_dataset(c);
                rep.censoring =
                    1.0 - ds.status.cast<double>().sum() / static_cast<double>(ds.n());
                const FitResult f = fit(ds, spec, config.pop);
                rep.ok = f.converged && f.cov_available;
                rep.message = f.message;
                if (rep.ok) {
                    rep.est = f.theta_flat;
                    rep.se = f.se;
                }
            } catch (const std::exception& ex) {
                rep.ok = false;
                rep.message = ex.what();
            }
        }
    };
    const int n_threads = std::max(1, jobs);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    StudyReport out;
    out.replications = B;
    out.n = config.n;
    int used = 0;
    double cens = 0.0;
    for (const auto& r : reps) {
        cens += r.censoring;
        if (r.ok) ++used;
    }
    out.n_used = used;
    out.n_failed = B - used;
    out.censoring_rate = cens / B;
    if (out.n_failed > 0.2 * B) {
        std::string first;
        for (const auto& r : reps) {
            if (!r.ok) {
                first = r.message;
                break;
            }
        }
        throw StudyError("run_study: " + std::to_string(out.n_failed) + " of " +
                         std::to_string(B) + " replications failed (first failure: " +
                         first + ")");
    }

    out.estimates.resize(used, k);
    out.standard_errors.resize(used, k);
    int row = 0;
    for (const auto& r : reps) {
        if (!r.ok) continue;
        out.estimates.row(row) = r.est;
        out.standard_errors.row(row) = r.se;
        ++row;
    }

    const Eigen::VectorXd truth = config.true_theta.flatten();
    const auto names = spec.parameter_names();
    for (int j = 0; j < k; ++j) {
        ParameterStats ps;
        ps.name = names[j];
        ps.true_value = j < truth.size() ? truth(j) : std::nan("");
        const auto col = out.estimates.col(j);
        ps.mean = col.mean();
        ps.sd = used > 1 ? std::sqrt((col.array() - ps.mean).square().sum() / (used - 1))
                         : 0.0;
        ps.mean_se = out.standard_errors.col(j).mean();
        int covered = 0;
        for (int r = 0; r < used; ++r) {
            const double half = 1.96 * out.standard_errors(r, j);
            if (std::fabs(out.estimates(r, j) - ps.true_value) <= half) ++covered;
        }
        ps.coverage = used > 0 ? static_cast<double>(covered) / used : 0.0;
        out.parameters.push_back(std::move(ps));
    }
    return out;
}

}  // namespace betatneh
