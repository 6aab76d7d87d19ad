#include "betatneh/lbfgsb.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

namespace betatneh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                   const BoxBounds& b) {
    Eigen::VectorXd pg(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double stepped = std::clamp(x(i) - g(i), b.lower(i), b.upper(i));
        pg(i) = x(i) - stepped;
    }
    return pg;
}

// Limited-memory pairs are folded into an explicit dense model Hessian
// B = theta*I - W M^{-1} W^T (compact representation). Dimensions here are
// small, so the dense form keeps the Cauchy-point and subspace algebra plain.
class QuadraticModel {
public:
    QuadraticModel(int dim, int history) : dim_(dim), history_(history) { reset(); }

    void reset() {
        s_.clear();
        y_.clear();
        theta_ = 1.0;
        rebuild();
    }

    bool empty() const { return s_.empty(); }

    void update(const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
        const double sy = s.dot(y);
        if (!(sy > 1e-10 * s.norm() * y.norm())) return;  // curvature guard
        s_.push_back(s);
        y_.push_back(y);
        while (static_cast<int>(s_.size()) > history_) {
            s_.pop_front();
            y_.pop_front();
        }
        theta_ = y.squaredNorm() / sy;
        rebuild();
    }

    const Eigen::MatrixXd& B() const { return b_; }

private:
    void rebuild() {
        b_ = theta_ * Eigen::MatrixXd::Identity(dim_, dim_);
        const int m = static_cast<int>(s_.size());
        if (m == 0) return;
        Eigen::MatrixXd S(dim_, m), Y(dim_, m);
        for (int j = 0; j < m; ++j) {
            S.col(j) = s_[j];
            Y.col(j) = y_[j];
        }
        const Eigen::MatrixXd sts = S.transpose() * S;
        const Eigen::MatrixXd sty = S.transpose() * Y;  // L + D (lower incl. diag)
        Eigen::MatrixXd M(2 * m, 2 * m);
        M.topLeftCorner(m, m) = -sty.diagonal().asDiagonal();
        Eigen::MatrixXd L = sty.template triangularView<Eigen::StrictlyLower>();
        M.topRightCorner(m, m) = L.transpose();
        M.bottomLeftCorner(m, m) = L;
        M.bottomRightCorner(m, m) = theta_ * sts;
        Eigen::MatrixXd W(dim_, 2 * m);
        W.leftCols(m) = Y;
        W.rightCols(m) = theta_ * S;
        b_ -= W * M.partialPivLu().solve(W.transpose());
    }

    int dim_;
    int history_;
    std::deque<Eigen::VectorXd> s_, y_;
    double theta_ = 1.0;
    Eigen::MatrixXd b_;
};

// Generalized Cauchy point: minimize the quadratic model along the projected
// steepest-descent path. Variables that reach a bound are fixed there exactly.
struct CauchyPoint {
    Eigen::VectorXd x;
    std::vector<bool> active;
};

CauchyPoint cauchy_point(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                         const Eigen::MatrixXd& B, const BoxBounds& bounds) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd d(n), tb(n);
    std::vector<bool> active(n, false);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (g(i) < 0.0) {
            tb(i) = (x(i) - bounds.upper(i)) / g(i);
        } else if (g(i) > 0.0) {
            tb(i) = (x(i) - bounds.lower(i)) / g(i);
        } else {
            tb(i) = kInf;
        }
        d(i) = (tb(i) > 0.0) ? -g(i) : 0.0;
        if (tb(i) <= 0.0) active[i] = true;  // sitting on a bound, pushed outward
    }

    std::vector<Eigen::Index> order(n);
    for (Eigen::Index i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return tb(a) < tb(b); });

    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    double t_cur = 0.0;
    std::size_t next = 0;
    while (next < order.size() && tb(order[next]) <= 0.0) ++next;

    while (true) {
        if (d.isZero(0.0)) break;
        const double f1 = g.dot(d) + d.dot(B * z);
        const double f2 = d.dot(B * d);
        if (f1 >= 0.0) break;  // model already increasing along the path
        const double dt_star = (f2 > 0.0) ? -f1 / f2 : kInf;
        double t_next = kInf;
        while (next < order.size() && tb(order[next]) <= t_cur + 1e-300) ++next;
        if (next < order.size()) t_next = tb(order[next]);
        const double seg = t_next - t_cur;
        if (dt_star < seg) {
            z += dt_star * d;
            break;
        }
        if (!std::isfinite(t_next)) {
            if (std::isfinite(dt_star)) z += dt_star * d;
            break;
        }
        // Advance to the breakpoint and freeze every variable that binds there.
        z += seg * d;
        t_cur = t_next;
        while (next < order.size() && tb(order[next]) <= t_cur) {
            const Eigen::Index i = order[next];
            z(i) = (g(i) < 0.0 ? bounds.upper(i) : bounds.lower(i)) - x(i);
            d(i) = 0.0;
            active[i] = true;
            ++next;
        }
    }

    CauchyPoint cp;
    cp.x = x + z;
    bounds.clamp(cp.x);
    // Snap anything that landed on a bound.
    for (Eigen::Index i = 0; i < n; ++i) {
        if (cp.x(i) <= bounds.lower(i)) {
            cp.x(i) = bounds.lower(i);
            active[i] = true;
        } else if (cp.x(i) >= bounds.upper(i)) {
            cp.x(i) = bounds.upper(i);
            active[i] = true;
        }
    }
    cp.active = std::move(active);
    return cp;
}

// Minimize the model over the variables free at the Cauchy point, truncated
// to stay inside the box.
Eigen::VectorXd subspace_step(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                              const Eigen::MatrixXd& B, const BoxBounds& bounds,
                              const CauchyPoint& cp) {
    const Eigen::Index n = x.size();
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!cp.active[i]) free.push_back(i);
    }
    if (free.empty()) return cp.x;

    const Eigen::VectorXd zc = cp.x - x;
    const Eigen::VectorXd r_full = g + B * zc;
    const Eigen::Index nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd Bff(nf, nf);
    Eigen::VectorXd rf(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
        rf(a) = r_full(free[a]);
        for (Eigen::Index b = 0; b < nf; ++b) Bff(a, b) = B(free[a], free[b]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Bff);
    Eigen::VectorXd du;
    if (ldlt.info() == Eigen::Success) {
        du = ldlt.solve(-rf);
    } else {
        du = -rf;  // fall back to steepest descent in the subspace
    }

    double alpha = 1.0;
    for (Eigen::Index a = 0; a < nf; ++a) {
        const Eigen::Index i = free[a];
        const double xi = cp.x(i);
        if (du(a) > 0.0) {
            alpha = std::min(alpha, (bounds.upper(i) - xi) / du(a));
        } else if (du(a) < 0.0) {
            alpha = std::min(alpha, (bounds.lower(i) - xi) / du(a));
        }
    }
    alpha = std::max(alpha, 0.0);

    Eigen::VectorXd xbar = cp.x;
    for (Eigen::Index a = 0; a < nf; ++a) xbar(free[a]) += alpha * du(a);
    bounds.clamp(xbar);
    return xbar;
}

struct LineSearchResult {
    double alpha = 0.0;
    double f = 0.0;
    Eigen::VectorXd x;
    Eigen::VectorXd g;
    bool ok = false;
    int evals = 0;
};

// Strong Wolfe line search with bisection zoom; +inf trial values are
// treated as "too far".
LineSearchResult wolfe_search(const ObjectiveFn& fn, const Eigen::VectorXd& x0,
                              double f0, const Eigen::VectorXd& g0,
                              const Eigen::VectorXd& d, double alpha_max,
                              const BoxBounds& bounds) {
    constexpr double c1 = 1e-4;
    constexpr double c2 = 0.9;
    const double dg0 = g0.dot(d);
    LineSearchResult out;
    out.g.resize(x0.size());
    if (dg0 >= 0.0) return out;  // not a descent direction

    auto eval = [&](double a, double& f, Eigen::VectorXd& g, Eigen::VectorXd& x) {
        x = x0 + a * d;
        bounds.clamp(x);
        f = fn(x, g);
        ++out.evals;
    };

    double lo = 0.0, f_lo = f0, dg_lo = dg0;
    double hi = kInf, f_hi = 0.0;
    bool have_hi = false;

    double alpha = std::min(1.0, alpha_max);
    Eigen::VectorXd x_try, g_try(x0.size());
    double f_try;

    for (int iter = 0; iter < 60; ++iter) {
        eval(alpha, f_try, g_try, x_try);
        const bool finite = std::isfinite(f_try);
        if (!finite || f_try > f0 + c1 * alpha * dg0 || f_try >= f_lo) {
            hi = alpha;
            f_hi = f_try;
            have_hi = true;
        } else {
            const double dg_try = g_try.dot(d);
            if (std::fabs(dg_try) <= -c2 * dg0 ||
                (alpha >= alpha_max && dg_try < 0.0)) {
                out.alpha = alpha;
                out.f = f_try;
                out.x = std::move(x_try);
                out.g = std::move(g_try);
                out.ok = true;
                return out;
            }
            if (dg_try >= 0.0) {
                hi = lo;
                f_hi = f_lo;
                lo = alpha;
                f_lo = f_try;
                dg_lo = dg_try;
                have_hi = true;
            } else {
                lo = alpha;
                f_lo = f_try;
                dg_lo = dg_try;
                if (!have_hi) {
                    const double grown = std::min(2.0 * alpha, alpha_max);
                    if (grown <= alpha) {  // already at the feasible end
                        out.alpha = alpha;
                        out.f = f_try;
                        out.x = std::move(x_try);
                        out.g = std::move(g_try);
                        out.ok = true;
                        return out;
                    }
                    alpha = grown;
                    continue;
                }
            }
        }
        if (!have_hi) continue;
        alpha = 0.5 * (lo + hi);
        if (hi - lo < 1e-16 || alpha <= 0.0) break;
    }

    // Accept any strict decrease found during the search.
    if (lo > 0.0 && f_lo < f0) {
        eval(lo, f_try, g_try, x_try);
        if (std::isfinite(f_try) && f_try < f0) {
            out.alpha = lo;
            out.f = f_try;
            out.x = std::move(x_try);
            out.g = std::move(g_try);
            out.ok = true;
        }
    }
    return out;
}

}  // namespace

void BoxBounds::clamp(Eigen::VectorXd& x) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x(i) = std::clamp(x(i), lower(i), upper(i));
    }
}

bool BoxBounds::contains(const Eigen::VectorXd& x) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x(i) < lower(i) || x(i) > upper(i)) return false;
    }
    return true;
}

LbfgsbResult lbfgsb_minimize(const ObjectiveFn& fn, const Eigen::VectorXd& x0,
                             const BoxBounds& bounds, const LbfgsbOptions& opts) {
    const Eigen::Index n = x0.size();
    if (bounds.lower.size() != n || bounds.upper.size() != n) {
        throw std::invalid_argument("lbfgsb_minimize: bounds dimension mismatch");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(bounds.lower(i) < bounds.upper(i))) {
            throw std::invalid_argument("lbfgsb_minimize: lower must be < upper");
        }
    }

    LbfgsbResult res;
    res.x = x0;
    bounds.clamp(res.x);
    res.gradient.resize(n);
    res.f = fn(res.x, res.gradient);
    res.n_evaluations = 1;
    if (!std::isfinite(res.f)) {
        res.message = "objective not finite at the initial point";
        return res;
    }

    QuadraticModel model(static_cast<int>(n), opts.history);
    bool restarted_here = false;

    for (res.iterations = 1; res.iterations <= opts.max_iterations; ++res.iterations) {
        const Eigen::VectorXd pg = projected_gradient(res.x, res.gradient, bounds);
        if (pg.lpNorm<Eigen::Infinity>() < opts.pg_tol) {
            res.converged = true;
            res.message = "projected gradient below tolerance";
            return res;
        }

        const Eigen::MatrixXd& B = model.B();
        const CauchyPoint cp = cauchy_point(res.x, res.gradient, B, bounds);
        Eigen::VectorXd xbar = subspace_step(res.x, res.gradient, B, bounds, cp);
        Eigen::VectorXd d = xbar - res.x;
        if (d.lpNorm<Eigen::Infinity>() < 1e-15) {
            d = cp.x - res.x;
        }
        double dg = res.gradient.dot(d);
        if (d.lpNorm<Eigen::Infinity>() < 1e-15 || dg >= 0.0) {
            // Degenerate model direction: restart from steepest descent once.
            if (!model.empty() && !restarted_here) {
                model.reset();
                restarted_here = true;
                --res.iterations;
                continue;
            }
            res.converged = true;
            res.message = "no feasible descent direction (stationary)";
            return res;
        }

        // The subspace step is feasible at alpha = 1; allow modest extrapolation
        // up to the box.
        double alpha_max = kInf;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (d(i) > 0.0) {
                alpha_max = std::min(alpha_max, (bounds.upper(i) - res.x(i)) / d(i));
            } else if (d(i) < 0.0) {
                alpha_max = std::min(alpha_max, (bounds.lower(i) - res.x(i)) / d(i));
            }
        }
        alpha_max = std::max(1.0, alpha_max);

        LineSearchResult ls =
            wolfe_search(fn, res.x, res.f, res.gradient, d, alpha_max, bounds);
        res.n_evaluations += ls.evals;
        if (!ls.ok) {
            if (!model.empty() && !restarted_here) {
                model.reset();
                restarted_here = true;
                --res.iterations;
                continue;
            }
            res.message = "line search failed";
            return res;
        }
        restarted_here = false;

        // Keep exact bound landings from the alpha = 1 subspace/Cauchy step.
        if (ls.alpha == 1.0) {
            ls.x = xbar;
            bounds.clamp(ls.x);
        }

        const Eigen::VectorXd s = ls.x - res.x;
        const Eigen::VectorXd y = ls.g - res.gradient;
        const double f_prev = res.f;
        res.x = ls.x;
        res.f = ls.f;
        res.gradient = ls.g;
        model.update(s, y);

        const double denom = std::max({std::fabs(f_prev), std::fabs(res.f), 1.0});
        if (std::fabs(f_prev - res.f) <= opts.f_rel_tol * denom) {
            res.converged = true;
            res.message = "relative objective change below tolerance";
            return res;
        }
    }

    res.iterations = opts.max_iterations;
    res.message = "iteration limit reached";
    return res;
}

}  // namespace betatneh
