#include "betatneh/likelihood.hpp"

#include <cmath>
#include <limits>

#include "betatneh/special_functions.hpp"

namespace betatneh {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTimeFloor = 1.0 / 365.25;  // one day, applied to t = 0 exactly

struct PopEval {
    const PopHazardSource& src;
    double hazard(double age, double t, const Dataset& d, int i) const {
        if (const auto* w = std::get_if<WeibullPopHazard>(&src)) {
            return w->hazard(age + t);
        }
        const auto& tp = std::get<TablePopSource>(src);
        const auto [sex, year] = record_keys(d, i);
        const int y = tp.static_year ? year : year + static_cast<int>(std::floor(t));
        return tp.table->hazard_at(sex, age + t, y).rate;
    }
    double cum_hazard(double age, double t, const Dataset& d, int i) const {
        if (const auto* w = std::get_if<WeibullPopHazard>(&src)) {
            return w->cum_hazard(age, t);
        }
        const auto& tp = std::get<TablePopSource>(src);
        const auto [sex, year] = record_keys(d, i);
        return tp.table->cum_hazard(sex, age, year, t, tp.static_year);
    }
    static std::pair<Sex, int> record_keys(const Dataset& d, int i) {
        const int sex_col = d.column("sex");
        const int year_col = d.column("year");
        if (sex_col < 0 || year_col < 0) {
            throw DataError(
                "life-table population hazard requires 'sex' (0=M,1=F) and 'year' "
                "covariate columns in the records");
        }
        const double sv = d.covariates(i, sex_col);
        if (sv != 0.0 && sv != 1.0) {
            throw DataError("record " + std::to_string(i) +
                            ": 'sex' column must be 0 (M) or 1 (F)");
        }
        return {sv == 0.0 ? Sex::male : Sex::female,
                static_cast<int>(d.covariates(i, year_col))};
    }
};

}  // namespace

Eigen::MatrixXd LikelihoodProblem::design_matrix(const Dataset& data,
                                                 const std::vector<std::string>& cols) {
    Eigen::MatrixXd m(data.n(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j] == "intercept") {
            m.col(static_cast<Eigen::Index>(j)).setOnes();
            continue;
        }
        const int c = data.column(cols[j]);
        if (c < 0) {
            throw DataError("design column '" + cols[j] + "' not found in records");
        }
        m.col(static_cast<Eigen::Index>(j)) = data.covariates.col(c);
    }
    return m;
}

Eigen::VectorXd LikelihoodProblem::population_hazards(const Dataset& data,
                                                      const PopHazardSource& pop) {
    PopEval pe{pop};
    Eigen::VectorXd out(data.n());
    for (int i = 0; i < data.n(); ++i) {
        const double t = data.time(i) == 0.0 ? kTimeFloor : data.time(i);
        out(i) = pe.hazard(data.age(i), t, data, i);
    }
    return out;
}

Eigen::VectorXd LikelihoodProblem::population_cum_hazards(const Dataset& data,
                                                          const PopHazardSource& pop) {
    PopEval pe{pop};
    Eigen::VectorXd out(data.n());
    for (int i = 0; i < data.n(); ++i) {
        const double t = data.time(i) == 0.0 ? kTimeFloor : data.time(i);
        out(i) = pe.cum_hazard(data.age(i), t, data, i);
    }
    return out;
}

LikelihoodProblem::LikelihoodProblem(const Dataset& data, const ModelSpec& spec,
                                     const PopHazardSource& pop) {
    spec.validate();
    data.validate();
    za_ = design_matrix(data, spec.alpha_design);
    zt_ = design_matrix(data, spec.tau_design);
    t_ = data.time;
    for (int i = 0; i < data.n(); ++i) {
        if (t_(i) == 0.0) t_(i) = kTimeFloor;
    }
    delta_ = data.status;
    n_events_ = delta_.sum();
    lpop_ = population_hazards(data, pop);
    pop_cum_constant_ = population_cum_hazards(data, pop).sum();
}

double LikelihoodProblem::value(const ParamVector& theta) const {
    return value(theta.flatten());
}

double LikelihoodProblem::value(const Eigen::VectorXd& theta) const {
    const int dg = n_gamma(), de = n_eta();
    const auto gamma = theta.head(dg);
    const double beta = theta(dg);
    const auto eta = theta.tail(de);
    if (!(beta > 1.0)) return kNegInf;

    const double lgb = special::log_gamma(beta);
    const Eigen::VectorXd alpha = za_ * gamma;
    const Eigen::VectorXd tau = zt_ * eta;

    double ll = 0.0;
    for (int i = 0; i < n(); ++i) {
        const double a = alpha(i), tu = tau(i);
        if (!(a > 0.0) || !(tu > 0.0)) return kNegInf;
        const double t = t_(i);
        double lambda, cum;
        if (t >= tu) {
            lambda = 0.0;
            cum = tu * std::exp(special::log_gamma(a) + lgb - special::log_gamma(a + beta));
        } else {
            const double u = t / tu;
            lambda = std::exp((a - 1.0) * std::log(u) + (beta - 1.0) * std::log1p(-u));
            const double b_ab =
                std::exp(special::log_gamma(a) + lgb - special::log_gamma(a + beta));
            cum = tu * b_ab * special::inc_beta_reg(u, a, beta);
        }
        if (delta_(i) == 1) {
            const double total = lpop_(i) + lambda;
            if (!(total > 0.0)) return kNegInf;
            ll += std::log(total);
        }
        ll -= cum;
    }
    return std::isfinite(ll) ? ll : kNegInf;
}

double LikelihoodProblem::value_and_gradient(const Eigen::VectorXd& theta,
                                             Eigen::VectorXd& grad) const {
    const int dg = n_gamma(), de = n_eta();
    grad.setZero(k());
    const auto gamma = theta.head(dg);
    const double beta = theta(dg);
    const auto eta = theta.tail(de);
    if (!(beta > 1.0)) return kNegInf;

    const Eigen::VectorXd alpha = za_ * gamma;
    const Eigen::VectorXd tau = zt_ * eta;

    double ll = 0.0;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(k());
    for (int i = 0; i < n(); ++i) {
        const double a = alpha(i), tu = tau(i);
        if (!(a > 0.0) || !(tu > 0.0)) return kNegInf;
        const double t = t_(i);
        const HazardEval ev = eval_hazard_full(t, a, tu, beta);
        double da = -ev.dcum.d_alpha;
        double db = -ev.dcum.d_beta;
        double dt = -ev.dcum.d_tau;
        if (delta_(i) == 1) {
            const double total = lpop_(i) + ev.lambda;
            if (!(total > 0.0)) return kNegInf;
            ll += std::log(total);
            da += ev.dlambda.d_alpha / total;
            db += ev.dlambda.d_beta / total;
            dt += ev.dlambda.d_tau / total;
        }
        ll -= ev.cum;
        g.head(dg) += da * za_.row(i).transpose();
        g(dg) += db;
        g.tail(de) += dt * zt_.row(i).transpose();
    }
    if (!std::isfinite(ll)) return kNegInf;
    grad = g;
    return ll;
}

Eigen::MatrixXd LikelihoodProblem::fisher_information(const Eigen::VectorXd& theta) const {
    const int dg = n_gamma(), de = n_eta();
    const auto gamma = theta.head(dg);
    const double beta = theta(dg);
    const auto eta = theta.tail(de);

    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(k(), k());
    Eigen::VectorXd v(k());
    const Eigen::VectorXd alpha = za_ * gamma;
    const Eigen::VectorXd tau = zt_ * eta;
    for (int i = 0; i < n(); ++i) {
        if (delta_(i) != 1) continue;
        const double a = alpha(i), tu = tau(i);
        if (!(a > 0.0) || !(tu > 0.0)) {
            throw InvalidParameterError("fisher_information: theta invalid at record " +
                                        std::to_string(i));
        }
        const double t = t_(i);
        if (t >= tu) continue;  // zero hazard gradient beyond tau
        const double u = t / tu;
        const double lambda =
            std::exp((a - 1.0) * std::log(u) + (beta - 1.0) * std::log1p(-u));
        const double total = lpop_(i) + lambda;
        if (!(total > 0.0)) continue;
        const double d_alpha = lambda * std::log(u);
        const double d_beta = lambda * std::log1p(-u);
        const double d_tau =
            lambda * (-(a - 1.0) / tu + (beta - 1.0) * u / (tu * (1.0 - u)));
        v.head(dg) = (d_alpha / total) * za_.row(i).transpose();
        v(dg) = d_beta / total;
        v.tail(de) = (d_tau / total) * zt_.row(i).transpose();
        info.selfadjointView<Eigen::Lower>().rankUpdate(v);
    }
    info = info.selfadjointView<Eigen::Lower>();
    return info / static_cast<double>(n());
}

}  // namespace betatneh
