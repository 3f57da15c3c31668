#include "longmem/lbfgsb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace longmem::lbfgsb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kArmijo = 1e-4;
constexpr double kCurvature = 0.9;

Eigen::VectorXd clamp(const Eigen::VectorXd& x, const Eigen::VectorXd& l,
                      const Eigen::VectorXd& u) {
    return x.cwiseMax(l).cwiseMin(u);
}

// Compact quadratic model B = theta*I - W*M*W^T built from the update pairs.
struct Model {
    double theta = 1.0;
    Eigen::MatrixXd w; // n x 2k
    Eigen::MatrixXd m; // 2k x 2k
    std::vector<Eigen::VectorXd> s_hist;
    std::vector<Eigen::VectorXd> y_hist;

    int pairs() const { return static_cast<int>(s_hist.size()); }

    void reset(Eigen::Index n) {
        theta = 1.0;
        s_hist.clear();
        y_hist.clear();
        w.resize(n, 0);
        m.resize(0, 0);
    }

    // Returns false if the middle matrix is numerically singular.
    bool rebuild(Eigen::Index n) {
        const int k = pairs();
        if (k == 0) {
            w.resize(n, 0);
            m.resize(0, 0);
            theta = 1.0;
            return true;
        }
        Eigen::MatrixXd s_mat(n, k), y_mat(n, k);
        for (int i = 0; i < k; ++i) {
            s_mat.col(i) = s_hist[static_cast<std::size_t>(i)];
            y_mat.col(i) = y_hist[static_cast<std::size_t>(i)];
        }
        const Eigen::VectorXd& s_last = s_hist.back();
        const Eigen::VectorXd& y_last = y_hist.back();
        theta = y_last.squaredNorm() / y_last.dot(s_last);

        Eigen::MatrixXd sy = s_mat.transpose() * y_mat; // k x k
        Eigen::MatrixXd d_diag = sy.diagonal().asDiagonal();
        Eigen::MatrixXd l_mat = sy.triangularView<Eigen::StrictlyLower>();

        Eigen::MatrixXd a(2 * k, 2 * k);
        a.topLeftCorner(k, k) = -d_diag;
        a.topRightCorner(k, k) = l_mat.transpose();
        a.bottomLeftCorner(k, k) = l_mat;
        a.bottomRightCorner(k, k) = theta * (s_mat.transpose() * s_mat);

        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (!lu.isInvertible()) return false;
        m = lu.inverse();

        w.resize(n, 2 * k);
        w.leftCols(k) = y_mat;
        w.rightCols(k) = theta * s_mat;
        return true;
    }
};

struct CauchyPoint {
    Eigen::VectorXd x_cp;
    Eigen::VectorXd c; // W^T (x_cp - x)
};

CauchyPoint cauchy_point(const Model& model, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& g, const Eigen::VectorXd& l,
                         const Eigen::VectorXd& u) {
    const Eigen::Index n = x.size();
    const Eigen::Index two_k = model.w.cols();

    Eigen::VectorXd breakpoints(n), d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (g(i) < 0.0)
            breakpoints(i) = (x(i) - u(i)) / g(i);
        else if (g(i) > 0.0)
            breakpoints(i) = (x(i) - l(i)) / g(i);
        else
            breakpoints(i) = kInf;
        d(i) = breakpoints(i) > 0.0 ? -g(i) : 0.0;
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return breakpoints(a) < breakpoints(b);
    });

    CauchyPoint result;
    result.x_cp = x;
    result.c = Eigen::VectorXd::Zero(two_k);

    Eigen::VectorXd p = model.w.transpose() * d;
    double fp = -d.squaredNorm();
    double fpp = -model.theta * fp - p.dot(model.m * p);
    if (fp >= 0.0) return result; // zero gradient on the moving set

    double dt_min = fpp > 0.0 ? -fp / fpp : kInf;
    double t_old = 0.0;

    std::size_t idx = 0;
    while (idx < order.size()) {
        const Eigen::Index b = order[idx];
        const double t_b = breakpoints(b);
        if (t_b <= 0.0) { // variable already at the bound it is pushed toward
            ++idx;
            continue;
        }
        if (t_b == kInf) break;
        const double dt = t_b - t_old;
        if (dt_min < dt) break;

        // Variable b reaches its bound: fix it and update the model terms.
        const double g_b = g(b);
        const double bound = g_b < 0.0 ? u(b) : l(b);
        const double z_b = bound - x(b);
        result.x_cp(b) = bound;

        result.c += dt * p;
        const Eigen::VectorXd w_b = model.w.row(b).transpose();
        const Eigen::VectorXd m_wb = model.m * w_b;
        fp += dt * fpp + g_b * g_b + model.theta * g_b * z_b - g_b * w_b.dot(model.m * result.c);
        fpp += -model.theta * g_b * g_b - 2.0 * g_b * m_wb.dot(p) - g_b * g_b * m_wb.dot(w_b);
        fpp = std::max(fpp, 1e-15 * std::fabs(fp));
        p += g_b * w_b;
        d(b) = 0.0;

        t_old = t_b;
        dt_min = fpp > 0.0 ? -fp / fpp : (fp < 0.0 ? kInf : 0.0);
        if (fp >= 0.0) {
            dt_min = 0.0;
            break;
        }
        ++idx;
    }

    dt_min = std::max(dt_min, 0.0);
    if (!std::isfinite(dt_min)) dt_min = 0.0;
    const double t_cp = t_old + dt_min;
    for (Eigen::Index i = 0; i < n; ++i)
        if (d(i) != 0.0) result.x_cp(i) = x(i) + t_cp * d(i);
    result.x_cp = clamp(result.x_cp, l, u);
    result.c += dt_min * p;
    return result;
}

// Minimizes the quadratic model over the variables free at the Cauchy point,
// backtracking into the box. Returns the trial point.
Eigen::VectorXd subspace_minimize(const Model& model, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& g, const Eigen::VectorXd& l,
                                  const Eigen::VectorXd& u, const CauchyPoint& cp) {
    const Eigen::Index n = x.size();
    std::vector<Eigen::Index> free_set;
    for (Eigen::Index i = 0; i < n; ++i)
        if (cp.x_cp(i) > l(i) && cp.x_cp(i) < u(i)) free_set.push_back(i);
    if (free_set.empty()) return cp.x_cp;

    const Eigen::Index nf = static_cast<Eigen::Index>(free_set.size());
    const Eigen::Index two_k = model.w.cols();

    Eigen::VectorXd full_grad = g + model.theta * (cp.x_cp - x);
    if (two_k > 0) full_grad -= model.w * (model.m * cp.c);

    Eigen::VectorXd r(nf);
    Eigen::MatrixXd w_free(nf, two_k);
    for (Eigen::Index i = 0; i < nf; ++i) {
        r(i) = full_grad(free_set[static_cast<std::size_t>(i)]);
        w_free.row(i) = model.w.row(free_set[static_cast<std::size_t>(i)]);
    }

    Eigen::VectorXd step = -r / model.theta;
    if (two_k > 0) {
        const Eigen::VectorXd v = model.m * (w_free.transpose() * r);
        Eigen::MatrixXd big = Eigen::MatrixXd::Identity(two_k, two_k) -
                              (model.m * (w_free.transpose() * w_free)) / model.theta;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(big);
        if (lu.isInvertible()) {
            const Eigen::VectorXd v2 = lu.solve(v);
            step -= (w_free * v2) / (model.theta * model.theta);
        }
    }
    if (!step.allFinite()) step = -r / model.theta;

    double alpha = 1.0;
    for (Eigen::Index i = 0; i < nf; ++i) {
        const Eigen::Index ii = free_set[static_cast<std::size_t>(i)];
        if (step(i) > 0.0)
            alpha = std::min(alpha, (u(ii) - cp.x_cp(ii)) / step(i));
        else if (step(i) < 0.0)
            alpha = std::min(alpha, (l(ii) - cp.x_cp(ii)) / step(i));
    }
    alpha = std::max(alpha, 0.0);

    Eigen::VectorXd x_bar = cp.x_cp;
    for (Eigen::Index i = 0; i < nf; ++i)
        x_bar(free_set[static_cast<std::size_t>(i)]) += alpha * step(i);
    return clamp(x_bar, l, u);
}

struct LineSearchResult {
    double alpha = 0.0;
    double f = 0.0;
    Eigen::VectorXd grad;
    bool ok = false;
    std::size_t n_evals = 0;
};

// Strong Wolfe search along d from x; alpha in (0, alpha_max].
LineSearchResult wolfe_search(const Objective& objective, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& d, double f0, double dphi0,
                              double alpha_max, std::size_t max_evals) {
    LineSearchResult best;
    best.grad.resize(x.size());

    Eigen::VectorXd grad_trial(x.size());
    const auto phi = [&](double alpha, double& dphi) {
        const double f = objective(x + alpha * d, grad_trial);
        dphi = grad_trial.dot(d);
        ++best.n_evals;
        return f;
    };

    double alpha_lo = 0.0, f_lo = f0, dphi_lo = dphi0;
    double alpha_hi = 0.0, f_hi = 0.0;
    bool bracketed = false;

    double alpha = std::min(1.0, alpha_max);
    double alpha_prev = 0.0, f_prev = f0, dphi_prev = dphi0;

    for (std::size_t it = 0; it < max_evals && !bracketed; ++it) {
        double dphi = 0.0;
        const double f = phi(alpha, dphi);
        if (!std::isfinite(f))
            throw std::runtime_error("line search produced a non-finite objective");
        if (f > f0 + kArmijo * alpha * dphi0 || (it > 0 && f >= f_prev)) {
            alpha_lo = alpha_prev; f_lo = f_prev; dphi_lo = dphi_prev;
            alpha_hi = alpha; f_hi = f;
            bracketed = true;
            break;
        }
        if (std::fabs(dphi) <= -kCurvature * dphi0) {
            best.alpha = alpha; best.f = f; best.grad = grad_trial; best.ok = true;
            return best;
        }
        if (dphi >= 0.0) {
            alpha_lo = alpha; f_lo = f; dphi_lo = dphi;
            alpha_hi = alpha_prev; f_hi = f_prev;
            bracketed = true;
            break;
        }
        if (alpha >= alpha_max) {
            // Still descending at the feasible limit: accept the boundary step.
            best.alpha = alpha; best.f = f; best.grad = grad_trial; best.ok = true;
            return best;
        }
        alpha_prev = alpha; f_prev = f; dphi_prev = dphi;
        alpha = std::min(2.0 * alpha, alpha_max);
    }
    if (!bracketed) return best;

    // Zoom: quadratic interpolation with a bisection safeguard.
    for (std::size_t it = best.n_evals; it < max_evals; ++it) {
        double alpha_j;
        const double denom = 2.0 * (f_hi - f_lo - dphi_lo * (alpha_hi - alpha_lo));
        if (std::fabs(denom) > 1e-300) {
            alpha_j = alpha_lo - dphi_lo * (alpha_hi - alpha_lo) * (alpha_hi - alpha_lo) / denom;
            const double lo = std::min(alpha_lo, alpha_hi), hi = std::max(alpha_lo, alpha_hi);
            const double margin = 0.1 * (hi - lo);
            if (!(alpha_j > lo + margin && alpha_j < hi - margin))
                alpha_j = 0.5 * (alpha_lo + alpha_hi);
        } else {
            alpha_j = 0.5 * (alpha_lo + alpha_hi);
        }

        double dphi = 0.0;
        const double f = phi(alpha_j, dphi);
        if (!std::isfinite(f))
            throw std::runtime_error("line search produced a non-finite objective");
        if (f > f0 + kArmijo * alpha_j * dphi0 || f >= f_lo) {
            alpha_hi = alpha_j; f_hi = f;
        } else {
            if (std::fabs(dphi) <= -kCurvature * dphi0) {
                best.alpha = alpha_j; best.f = f; best.grad = grad_trial; best.ok = true;
                return best;
            }
            if (dphi * (alpha_hi - alpha_lo) >= 0.0) {
                alpha_hi = alpha_lo; f_hi = f_lo;
            }
            alpha_lo = alpha_j; f_lo = f; dphi_lo = dphi;
        }
        if (std::fabs(alpha_hi - alpha_lo) < 1e-16) break;
    }

    // Wolfe conditions unattainable within budget; fall back to the best
    // sufficient-decrease point seen.
    if (alpha_lo > 0.0 && f_lo < f0) {
        double dphi = 0.0;
        best.f = phi(alpha_lo, dphi);
        best.alpha = alpha_lo;
        best.grad = grad_trial;
        best.ok = best.f < f0;
    }
    return best;
}

} // namespace

Result minimize(const Objective& objective, Eigen::VectorXd x0,
                const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                const Options& options) {
    const Eigen::Index n = x0.size();
    if (lower.size() != n || upper.size() != n)
        throw std::invalid_argument("lbfgsb: bound sizes do not match x0");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(lower(i) <= upper(i)))
            throw std::invalid_argument("lbfgsb: lower bound exceeds upper bound");

    Result result;
    result.x = clamp(x0, lower, upper);
    result.grad.resize(n);
    result.f = objective(result.x, result.grad);
    result.n_evals = 1;

    Model model;
    model.reset(n);
    bool memory_was_reset = false;

    const auto pg_norm = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
        return (x - clamp(x - g, lower, upper)).template lpNorm<Eigen::Infinity>();
    };
    // Convergence scales with the objective's magnitude: below
    // eps*|f| the line search cannot certify any further decrease.
    const auto stationary = [&](double pg, double f) {
        return pg <= options.pg_tol * std::max(1.0, std::fabs(f));
    };

    for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
        result.pg_norm = pg_norm(result.x, result.grad);
        if (stationary(result.pg_norm, result.f)) {
            result.converged = true;
            return result;
        }

        const CauchyPoint cp = cauchy_point(model, result.x, result.grad, lower, upper);
        Eigen::VectorXd x_bar = subspace_minimize(model, result.x, result.grad, lower, upper, cp);

        Eigen::VectorXd d = x_bar - result.x;
        double dphi0 = result.grad.dot(d);
        if (d.norm() == 0.0 || dphi0 >= 0.0) {
            d = cp.x_cp - result.x;
            dphi0 = result.grad.dot(d);
        }
        if (d.norm() == 0.0 || dphi0 >= 0.0) {
            d = clamp(result.x - result.grad, lower, upper) - result.x;
            dphi0 = result.grad.dot(d);
            if (d.norm() == 0.0 || dphi0 >= 0.0) {
                result.converged = stationary(result.pg_norm, result.f);
                return result;
            }
        }

        // Largest feasible step along d (>= 1 since x_bar is inside the box).
        double alpha_max = kInf;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (d(i) > 0.0)
                alpha_max = std::min(alpha_max, (upper(i) - result.x(i)) / d(i));
            else if (d(i) < 0.0)
                alpha_max = std::min(alpha_max, (lower(i) - result.x(i)) / d(i));
        }
        alpha_max = std::min(std::max(alpha_max, 1.0), 8.0);

        LineSearchResult ls = wolfe_search(objective, result.x, d, result.f, dphi0,
                                           alpha_max, options.max_line_search_evals);
        result.n_evals += ls.n_evals;
        if (!ls.ok) {
            if (!memory_was_reset && model.pairs() > 0) {
                // Stale curvature can produce poor directions; retry fresh.
                model.reset(n);
                memory_was_reset = true;
                continue;
            }
            // No representable decrease exists even along projected steepest
            // descent: the iterate is a minimizer at double precision.
            result.iterations = iter + 1;
            result.pg_norm = pg_norm(result.x, result.grad);
            result.converged = true;
            return result;
        }
        memory_was_reset = false;

        const Eigen::VectorXd x_new = clamp(result.x + ls.alpha * d, lower, upper);
        const Eigen::VectorXd s = x_new - result.x;
        const Eigen::VectorXd y = ls.grad - result.grad;

        result.x = x_new;
        result.f = ls.f;
        result.grad = ls.grad;
        result.iterations = iter + 1;

        if (s.dot(y) > 1e-10 * s.norm() * y.norm()) {
            model.s_hist.push_back(s);
            model.y_hist.push_back(y);
            if (model.pairs() > options.history) {
                model.s_hist.erase(model.s_hist.begin());
                model.y_hist.erase(model.y_hist.begin());
            }
            if (!model.rebuild(n)) model.reset(n);
        }
    }

    result.pg_norm = pg_norm(result.x, result.grad);
    result.converged = stationary(result.pg_norm, result.f);
    return result;
}

} // namespace lbfgsb
