#include "betatneh/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "betatneh/rng.hpp"
#include "betatneh/special_functions.hpp"

namespace betatneh {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

int eta_intercept_index(const ModelSpec& spec) {
    const auto it =
        std::find(spec.tau_design.begin(), spec.tau_design.end(), "intercept");
    return static_cast<int>(spec.alpha_design.size()) + 1 +
           static_cast<int>(it - spec.tau_design.begin());
}

int beta_index(const ModelSpec& spec) {
    return static_cast<int>(spec.alpha_design.size());
}

Eigen::VectorXd design_row(const ModelSpec& spec,
                           const std::vector<std::string>& design, const Profile& z) {
    Eigen::VectorXd row(static_cast<Eigen::Index>(design.size()));
    for (std::size_t j = 0; j < design.size(); ++j) {
        if (design[j] == "intercept") {
            row(static_cast<Eigen::Index>(j)) = 1.0;
            continue;
        }
        const auto it = z.find(design[j]);
        if (it == z.end()) {
            throw std::invalid_argument("profile is missing covariate '" + design[j] +
                                        "'");
        }
        row(static_cast<Eigen::Index>(j)) = it->second;
    }
    return row;
}

struct ShapeAtProfile {
    double alpha, tau, beta;
};

ShapeAtProfile shape_at(const ModelSpec& spec, const Eigen::VectorXd& theta,
                        const Profile& z) {
    const int dg = static_cast<int>(spec.alpha_design.size());
    const int de = static_cast<int>(spec.tau_design.size());
    const Eigen::VectorXd za = design_row(spec, spec.alpha_design, z);
    const Eigen::VectorXd zt = design_row(spec, spec.tau_design, z);
    return {za.dot(theta.head(dg)), zt.dot(theta.tail(de)), theta(dg)};
}

}  // namespace

bool FitResult::any_boundary_hit() const {
    return std::any_of(boundary_hits.begin(), boundary_hits.end(),
                       [](bool b) { return b; });
}

std::vector<std::string> FitResult::boundary_parameter_names() const {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < boundary_hits.size(); ++j) {
        if (boundary_hits[j]) out.push_back(parameter_names[j]);
    }
    return out;
}

BoxBounds resolve_bounds(const ModelSpec& spec, const Dataset& data) {
    spec.validate();
    const int k = spec.n_parameters();
    const int dg = static_cast<int>(spec.alpha_design.size());
    const double tau_hi = std::max(0.2, 1.5 * data.max_time());
    BoxBounds box;
    box.lower.resize(k);
    box.upper.resize(k);
    const auto names = spec.parameter_names();
    const int eta0 = eta_intercept_index(spec);
    for (int j = 0; j < k; ++j) {
        Interval iv;
        if (j < dg) {
            iv = {-10.0, 10.0};
        } else if (j == dg) {
            iv = {1.0 + 1e-6, 30.0};
        } else if (j == eta0) {
            iv = {0.1, tau_hi};
        } else {
            iv = {-tau_hi, tau_hi};
        }
        if (const auto it = spec.bounds.find(names[j]); it != spec.bounds.end()) {
            iv = it->second;
        }
        box.lower(j) = iv.lo;
        box.upper(j) = iv.hi;
    }
    return box;
}

Eigen::VectorXd resolve_init(const ModelSpec& spec, const Dataset& data,
                             const BoxBounds& box) {
    const int k = spec.n_parameters();
    const int dg = static_cast<int>(spec.alpha_design.size());
    const int eta0 = eta_intercept_index(spec);
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(k);
    const auto names = spec.parameter_names();
    for (int j = 0; j < k; ++j) {
        double v = 0.0;
        if (j < dg) {
            v = (spec.alpha_design[j] == "intercept") ? 1.0 : 0.0;
        } else if (j == dg) {
            v = 2.0;
        } else if (j == eta0) {
            v = 2.0 * data.median_event_time();
        }
        if (const auto it = spec.init.find(names[j]); it != spec.init.end()) {
            v = it->second;
        }
        // keep the start strictly interior
        const double w = box.upper(j) - box.lower(j);
        x0(j) = std::clamp(v, box.lower(j) + 1e-4 * w, box.upper(j) - 1e-4 * w);
    }
    return x0;
}

FitResult fit(const Dataset& data, const ModelSpec& spec, const PopHazardSource& pop) {
    const BoxBounds box = resolve_bounds(spec, data);
    return fit(data, spec, pop, resolve_init(spec, data, box));
}

FitResult fit(const Dataset& data, const ModelSpec& spec, const PopHazardSource& pop,
              const Eigen::VectorXd& init_flat) {
    spec.validate();
    const LikelihoodProblem problem(data, spec, pop);
    BoxBounds box = resolve_bounds(spec, data);
    if (init_flat.size() != problem.k()) {
        throw std::invalid_argument("fit: init has wrong length");
    }
    if (!box.contains(init_flat)) {
        throw std::invalid_argument("fit: init must lie inside the bound box");
    }

    const auto objective = [&problem](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        const double ll = problem.value_and_gradient(x, g);
        g = -g;
        return -ll;
    };

    LbfgsbOptions opts;
    opts.max_iterations = spec.optimizer.max_iterations;
    opts.pg_tol = spec.optimizer.pg_tol;
    opts.f_rel_tol = spec.optimizer.f_rel_tol;
    opts.history = spec.optimizer.history;

    const int k = problem.k();
    const int eta0 = eta_intercept_index(spec);
    const int betaj = beta_index(spec);
    const double beta_floor = 1.0 + 1e-6;

    Eigen::VectorXd x = init_flat;
    LbfgsbResult opt;
    int expansions = 0;
    std::vector<bool> hits(k, false);
    for (;;) {
        opt = lbfgsb_minimize(objective, x, box, opts);
        x = opt.x;
        bool any_hit = false;
        for (int j = 0; j < k; ++j) {
            const double tol =
                spec.optimizer.bound_hit_rel_tol * (box.upper(j) - box.lower(j));
            hits[j] = (x(j) - box.lower(j) <= tol) || (box.upper(j) - x(j) <= tol);
            any_hit = any_hit || hits[j];
        }
        if (!any_hit || expansions >= spec.optimizer.max_expansions || !opt.converged) {
            break;
        }
        bool changed = false;
        for (int j = 0; j < k; ++j) {
            if (!hits[j]) continue;
            const double w = box.upper(j) - box.lower(j);
            if (x(j) - box.lower(j) <= spec.optimizer.bound_hit_rel_tol * w) {
                double lo = box.lower(j);
                if (j == betaj) {
                    lo = beta_floor;  // hard model constraint, not expandable
                } else if (lo < 0.0) {
                    lo *= 2.0;
                } else if (lo > 0.0) {
                    lo *= 0.5;
                } else {
                    lo = -w;
                }
                if (j == eta0) lo = std::max(lo, 1e-4);
                if (lo < box.lower(j)) {
                    box.lower(j) = lo;
                    changed = true;
                }
            } else {
                double hi = box.upper(j);
                if (j == eta0) {
                    hi = std::min(hi * 1.5, spec.optimizer.tau_intercept_upper_cap);
                } else if (hi > 0.0) {
                    hi *= 2.0;
                } else if (hi < 0.0) {
                    hi *= 0.5;
                } else {
                    hi = w;
                }
                if (hi > box.upper(j)) {
                    box.upper(j) = hi;
                    changed = true;
                }
            }
        }
        if (!changed) break;
        ++expansions;
    }

    FitResult out;
    out.spec = spec;
    out.parameter_names = spec.parameter_names();
    out.theta_flat = x;
    out.theta = ParamVector::from_flat(x, problem.n_gamma(), problem.n_eta());
    out.loglik = -opt.f;
    out.aic = -2.0 * out.loglik + 2.0 * k;
    out.boundary_hits = hits;
    out.expansions_performed = expansions;
    out.converged = opt.converged;
    out.final_bounds = box;
    out.n = problem.n();
    out.n_events = problem.n_events();

    std::ostringstream msg;
    msg << opt.message;
    if (out.any_boundary_hit()) {
        msg << "; at bound after " << expansions << " expansion(s):";
        for (const auto& nm : out.boundary_parameter_names()) msg << ' ' << nm;
        msg << " (standard errors unreliable at bounds)";
    }
    out.message = msg.str();

    // Eq.-(8)-style outer-product information; covariance = (n I_hat)^{-1}.
    const Eigen::MatrixXd info = problem.fisher_information(x);
    const Eigen::MatrixXd scaled = static_cast<double>(problem.n()) * info;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scaled);
    out.se = Eigen::VectorXd::Constant(k, kNan);
    if (es.info() == Eigen::Success) {
        const auto& ev = es.eigenvalues();
        const double emax = ev.maxCoeff();
        if (emax > 0.0 && ev.minCoeff() > 1e-12 * emax) {
            out.covariance = es.eigenvectors() *
                             ev.cwiseInverse().asDiagonal() *
                             es.eigenvectors().transpose();
            out.cov_available = true;
            out.se = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
        }
    }
    return out;
}

CiResult delta_method_ci(const FitResult& fit,
                         const std::function<double(const Eigen::VectorXd&)>& g,
                         double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("delta_method_ci: level must lie in (0,1)");
    }
    const double est = g(fit.theta_flat);
    CiResult out{est, kNan, kNan, kNan, false};
    if (!fit.cov_available) return out;

    const int k = static_cast<int>(fit.theta_flat.size());
    Eigen::VectorXd grad(k);
    Eigen::VectorXd th = fit.theta_flat;
    for (int j = 0; j < k; ++j) {
        const double h = 1e-5 * std::max(std::fabs(th(j)), 1.0);
        const double saved = th(j);
        th(j) = saved + h;
        const double up = g(th);
        th(j) = saved - h;
        const double dn = g(th);
        th(j) = saved;
        grad(j) = (up - dn) / (2.0 * h);
    }
    const double var = grad.dot(fit.covariance * grad);
    out.se = std::sqrt(std::max(var, 0.0));
    const double z = special::norm_quantile(0.5 * (1.0 + level));
    out.lower = est - z * out.se;
    out.upper = est + z * out.se;
    out.valid = !fit.any_boundary_hit();
    return out;
}

double alpha_at_profile(const FitResult& fit, const Profile& z) {
    return shape_at(fit.spec, fit.theta_flat, z).alpha;
}

double tau_at_profile(const FitResult& fit, const Profile& z) {
    return shape_at(fit.spec, fit.theta_flat, z).tau;
}

CiResult cure_fraction_ci(const FitResult& fit, const Profile& z, double level) {
    const ModelSpec& spec = fit.spec;
    auto g = [&spec, &z](const Eigen::VectorXd& th) {
        const auto s = shape_at(spec, th, z);
        return cure_fraction(s.alpha, s.tau, s.beta);
    };
    CiResult ci = delta_method_ci(fit, g, level);
    if (std::isfinite(ci.lower)) ci.lower = std::clamp(ci.lower, 0.0, 1.0);
    if (std::isfinite(ci.upper)) ci.upper = std::clamp(ci.upper, 0.0, 1.0);
    return ci;
}

CiResult tneh_ci(const FitResult& fit, const Profile& z, double level) {
    const ModelSpec& spec = fit.spec;
    const int dg = static_cast<int>(spec.alpha_design.size());
    const int de = static_cast<int>(spec.tau_design.size());
    const Eigen::VectorXd zt = design_row(spec, spec.tau_design, z);
    const double est = zt.dot(fit.theta_flat.tail(de));
    CiResult out{est, kNan, kNan, kNan, false};
    if (!fit.cov_available) return out;
    const Eigen::MatrixXd cov_eta = fit.covariance.block(dg + 1, dg + 1, de, de);
    out.se = std::sqrt(std::max(zt.dot(cov_eta * zt), 0.0));
    const double q = special::norm_quantile(0.5 * (1.0 + level));
    out.lower = est - q * out.se;
    out.upper = est + q * out.se;
    out.valid = !fit.any_boundary_hit();
    return out;
}

CiResult net_survival_ci(const FitResult& fit, double t, const Profile& z,
                         double level) {
    const ModelSpec& spec = fit.spec;
    auto g = [&spec, &z, t](const Eigen::VectorXd& th) {
        const auto s = shape_at(spec, th, z);
        return net_survival(t, s.alpha, s.tau, s.beta);
    };
    CiResult ci = delta_method_ci(fit, g, level);
    if (std::isfinite(ci.lower)) ci.lower = std::clamp(ci.lower, 0.0, 1.0);
    if (std::isfinite(ci.upper)) ci.upper = std::clamp(ci.upper, 0.0, 1.0);
    return ci;
}

IdentifiabilityReport check_identifiability(const Dataset& data,
                                            const ModelSpec& spec) {
    spec.validate();
    const Eigen::MatrixXd za = LikelihoodProblem::design_matrix(data, spec.alpha_design);
    const Eigen::MatrixXd zt = LikelihoodProblem::design_matrix(data, spec.tau_design);
    const auto rank_of = [](const Eigen::MatrixXd& m) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        const auto& sv = svd.singularValues();
        if (sv.size() == 0) return 0;
        const double tol = 1e-10 * sv(0);
        int r = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i) {
            if (sv(i) > tol) ++r;
        }
        return r;
    };
    IdentifiabilityReport rep;
    rep.alpha_cols = static_cast<int>(za.cols());
    rep.tau_cols = static_cast<int>(zt.cols());
    rep.alpha_rank = rank_of(za);
    rep.tau_rank = rank_of(zt);
    rep.ok = rep.alpha_rank == rep.alpha_cols && rep.tau_rank == rep.tau_cols;
    std::ostringstream details;
    if (rep.ok) {
        details << "both designs full column rank";
    } else {
        if (rep.alpha_rank < rep.alpha_cols) {
            details << "alpha design rank " << rep.alpha_rank << " < " << rep.alpha_cols
                    << " columns; ";
        }
        if (rep.tau_rank < rep.tau_cols) {
            details << "tau design rank " << rep.tau_rank << " < " << rep.tau_cols
                    << " columns; ";
        }
        details << "parameters along the null space are not identifiable";
    }
    rep.details = details.str();
    return rep;
}

SweepReport initial_value_sweep(const Dataset& data, const ModelSpec& spec,
                                const PopHazardSource& pop, int K,
                                std::uint64_t seed) {
    if (K < 2) {
        throw std::invalid_argument("initial_value_sweep: K must be >= 2");
    }
    const BoxBounds box = resolve_bounds(spec, data);
    const int k = spec.n_parameters();
    Rng rng(seed);

    SweepReport rep;
    rep.parameter_names = spec.parameter_names();
    double ll_min = std::numeric_limits<double>::infinity();
    double ll_max = -std::numeric_limits<double>::infinity();
    for (int draw = 0; draw < K; ++draw) {
        Eigen::VectorXd x0(k);
        for (int j = 0; j < k; ++j) x0(j) = rng.uniform(box.lower(j), box.upper(j));
        SweepEntry e;
        e.init = x0;
        try {
            const FitResult f = fit(data, spec, pop, x0);
            e.ok = f.converged;
            e.message = f.message;
            e.loglik = f.loglik;
            if (f.converged) {
                e.estimate = f.theta_flat;
            }
        } catch (const std::exception& ex) {
            e.ok = false;
            e.message = ex.what();
        }
        if (e.ok) {
            if (rep.est_min.size() == 0) {
                rep.est_min = e.estimate;
                rep.est_max = e.estimate;
            } else {
                rep.est_min = rep.est_min.cwiseMin(e.estimate);
                rep.est_max = rep.est_max.cwiseMax(e.estimate);
            }
            ll_min = std::min(ll_min, e.loglik);
            ll_max = std::max(ll_max, e.loglik);
        } else {
            ++rep.n_failed;
        }
        rep.entries.push_back(std::move(e));
    }
    if (rep.est_min.size() > 0) {
        rep.est_range = rep.est_max - rep.est_min;
        rep.max_loglik_gap = ll_max - ll_min;
    } else {
        rep.est_min = rep.est_max = rep.est_range = Eigen::VectorXd::Constant(k, kNan);
        rep.max_loglik_gap = kNan;
    }
    return rep;
}

}  // namespace betatneh
