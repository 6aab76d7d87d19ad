#include "betatneh/model.hpp"

#include <algorithm>
#include <cmath>

#include "betatneh/special_functions.hpp"

namespace betatneh {

namespace {

void require_valid_shape(double alpha, double tau) {
    if (!std::isfinite(alpha) || alpha <= 0.0) {
        throw InvalidParameterError("alpha(z) must be > 0, got " + std::to_string(alpha));
    }
    if (!std::isfinite(tau) || tau <= 0.0) {
        throw InvalidParameterError("tau(z) must be > 0, got " + std::to_string(tau));
    }
}

void require_time(double t) {
    if (!(t >= 0.0)) {
        throw std::domain_error("time must be >= 0, got " + std::to_string(t));
    }
}

}  // namespace

Eigen::VectorXd ParamVector::flatten() const {
    Eigen::VectorXd v(size());
    v.head(gamma.size()) = gamma;
    v(gamma.size()) = beta_shape;
    v.tail(eta.size()) = eta;
    return v;
}

ParamVector ParamVector::from_flat(const Eigen::VectorXd& v, int n_gamma, int n_eta) {
    if (v.size() != n_gamma + 1 + n_eta) {
        throw std::invalid_argument("ParamVector::from_flat: length mismatch");
    }
    ParamVector p;
    p.gamma = v.head(n_gamma);
    p.beta_shape = v(n_gamma);
    p.eta = v.tail(n_eta);
    return p;
}

std::vector<std::string> ModelSpec::parameter_names() const {
    std::vector<std::string> names;
    names.reserve(n_parameters());
    for (const auto& c : alpha_design) names.push_back("gamma." + c);
    names.push_back("beta");
    for (const auto& c : tau_design) names.push_back("eta." + c);
    return names;
}

void ModelSpec::validate() const {
    auto has_intercept = [](const std::vector<std::string>& d) {
        return std::find(d.begin(), d.end(), "intercept") != d.end();
    };
    if (alpha_design.empty() || tau_design.empty()) {
        throw std::invalid_argument("ModelSpec: designs must be non-empty");
    }
    if (!has_intercept(alpha_design) || !has_intercept(tau_design)) {
        throw std::invalid_argument("ModelSpec: both designs must include the intercept");
    }
    for (const auto& [name, iv] : bounds) {
        if (!(iv.lo < iv.hi)) {
            throw std::invalid_argument("ModelSpec: bound " + name + " has lo >= hi");
        }
        if (name == "beta" && iv.lo < 1.0 + 1e-6) {
            throw std::invalid_argument("ModelSpec: beta lower bound must be >= 1 + 1e-6");
        }
        if (name == "eta.intercept" && iv.lo <= 0.0) {
            throw std::invalid_argument(
                "ModelSpec: tau-intercept lower bound must be > 0");
        }
    }
}

double alpha_of(std::span<const double> z, const Eigen::VectorXd& gamma) {
    if (static_cast<Eigen::Index>(z.size()) != gamma.size()) {
        throw std::invalid_argument("alpha_of: design row length " +
                                    std::to_string(z.size()) + " != gamma length " +
                                    std::to_string(gamma.size()));
    }
    double acc = 0.0;
    for (Eigen::Index j = 0; j < gamma.size(); ++j) acc += gamma(j) * z[j];
    return acc;
}

double tau_of(std::span<const double> z, const Eigen::VectorXd& eta) {
    if (static_cast<Eigen::Index>(z.size()) != eta.size()) {
        throw std::invalid_argument("tau_of: design row length " +
                                    std::to_string(z.size()) + " != eta length " +
                                    std::to_string(eta.size()));
    }
    double acc = 0.0;
    for (Eigen::Index j = 0; j < eta.size(); ++j) acc += eta(j) * z[j];
    return acc;
}

double excess_hazard(double t, double alpha, double tau, double beta) {
    require_time(t);
    require_valid_shape(alpha, tau);
    if (t > tau) return 0.0;
    const double u = t / tau;
    // IEEE pow covers the edges: 0^0 = 1, 0^negative = +inf.
    return std::pow(u, alpha - 1.0) * std::pow(1.0 - u, beta - 1.0);
}

double cum_excess_hazard(double t, double alpha, double tau, double beta) {
    require_time(t);
    require_valid_shape(alpha, tau);
    const double u = std::min(t / tau, 1.0);
    return tau * special::beta_fn(alpha, beta) * special::inc_beta_reg(u, alpha, beta);
}

double net_survival(double t, double alpha, double tau, double beta) {
    return std::exp(-cum_excess_hazard(t, alpha, tau, beta));
}

double cure_fraction(double alpha, double tau, double beta) {
    require_valid_shape(alpha, tau);
    return std::exp(-tau * special::beta_fn(alpha, beta));
}

double nmcm_net_survival(double t, double alpha, double tau, double beta) {
    require_time(t);
    const double pi = cure_fraction(alpha, tau, beta);
    const double u = std::min(t / tau, 1.0);
    return std::pow(pi, special::inc_beta_reg(u, alpha, beta));
}

HazardGradient excess_hazard_gradient(double t, double alpha, double tau, double beta) {
    require_time(t);
    require_valid_shape(alpha, tau);
    if (t > tau) return {0.0, 0.0, 0.0};
    if (t == 0.0 || t == tau) {
        throw BoundaryGradientError(
            "excess_hazard_gradient undefined exactly at t = 0 or t = tau");
    }
    const double u = t / tau;
    const double lambda = std::pow(u, alpha - 1.0) * std::pow(1.0 - u, beta - 1.0);
    return {lambda * std::log(u),
            lambda * (-(alpha - 1.0) / tau + (beta - 1.0) * u / (tau * (1.0 - u))),
            lambda * std::log1p(-u)};
}

CumHazardGradient cum_excess_hazard_gradient(double t, double alpha, double tau,
                                             double beta) {
    require_time(t);
    require_valid_shape(alpha, tau);
    if (t == 0.0) return {0.0, 0.0, 0.0};
    if (t >= tau) {
        const double b = special::beta_fn(alpha, beta);
        const double psi_ab = special::digamma(alpha + beta);
        return {tau * b * (special::digamma(alpha) - psi_ab),
                b,
                tau * b * (special::digamma(beta) - psi_ab)};
    }
    const double u = t / tau;
    const auto ib = special::inc_beta_lower_derivs(u, alpha, beta);
    const double edge = std::pow(u, alpha) * std::pow(1.0 - u, beta - 1.0);
    return {tau * ib.d_da, ib.value - edge, tau * ib.d_db};
}

HazardEval eval_hazard_full(double t, double alpha, double tau, double beta) {
    require_time(t);
    require_valid_shape(alpha, tau);
    HazardEval ev{};
    if (t == 0.0) {
        ev.lambda = excess_hazard(0.0, alpha, tau, beta);
        return ev;
    }
    if (t >= tau) {
        const double b = special::beta_fn(alpha, beta);
        const double psi_ab = special::digamma(alpha + beta);
        ev.lambda = 0.0;
        ev.cum = tau * b;
        ev.dlambda = {0.0, 0.0, 0.0};
        ev.dcum = {tau * b * (special::digamma(alpha) - psi_ab),
                   b,
                   tau * b * (special::digamma(beta) - psi_ab)};
        return ev;
    }
    const double u = t / tau;
    const double lu = std::log(u);
    const double l1mu = std::log1p(-u);
    ev.lambda = std::exp((alpha - 1.0) * lu + (beta - 1.0) * l1mu);
    ev.dlambda = {ev.lambda * lu,
                  ev.lambda * (-(alpha - 1.0) / tau + (beta - 1.0) * u / (tau * (1.0 - u))),
                  ev.lambda * l1mu};
    const auto ib = special::inc_beta_lower_derivs(u, alpha, beta);
    ev.cum = tau * ib.value;
    ev.dcum = {tau * ib.d_da, ib.value - u * ev.lambda, tau * ib.d_db};
    return ev;
}

}  // namespace betatneh
