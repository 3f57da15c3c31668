#include "longmem/gse.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "longmem/error.hpp"
#include "longmem/lbfgsb.hpp"

namespace longmem::gse {

using std::numbers::pi;

bool is_feasible(const Eigen::VectorXd& d) {
    return (d.array() > -0.5).all() && (d.array() < 0.5).all();
}

void require_feasible(const Eigen::VectorXd& d) {
    if (d.size() < 1) throw validation_error("memory vector is empty");
    if (!is_feasible(d))
        throw validation_error("memory vector outside the feasible box (-1/2, 1/2)");
}

Eigen::VectorXcd lambda_diag(double lambda, const Eigen::VectorXd& d) {
    if (!(lambda > 0.0) || lambda > pi)
        throw validation_error("frequency must lie in (0, pi]");
    require_feasible(d);
    const std::complex<double> phase = std::polar(1.0, (pi - lambda) / 2.0);
    Eigen::VectorXcd entries(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i)
        entries(i) = std::pow(lambda, -d(i)) * phase;
    return entries;
}

namespace {

// First m ordinates plus the per-frequency factors used by the objective.
struct LocalData {
    Eigen::MatrixXcd dft;            // m x p
    Eigen::VectorXd log_lambda;      // log lambda_j
    Eigen::VectorXd half_angle;      // (pi - lambda_j) / 2
    double mean_log_lambda = 0.0;
};

LocalData prepare(const spectral::Periodogram& pg, std::size_t m) {
    if (m < 1 || m > pg.size())
        throw validation_error("bandwidth must be in [1, number of frequencies]");
    LocalData data;
    const Eigen::Index mm = static_cast<Eigen::Index>(m);
    data.dft = pg.dft.topRows(mm);
    data.log_lambda.resize(mm);
    data.half_angle.resize(mm);
    for (Eigen::Index j = 0; j < mm; ++j) {
        data.log_lambda(j) = std::log(pg.freqs[static_cast<std::size_t>(j)]);
        data.half_angle(j) = (pi - pg.freqs[static_cast<std::size_t>(j)]) / 2.0;
    }
    data.mean_log_lambda = data.log_lambda.mean();
    return data;
}

// Rescaled ordinates w_{j,i} = y_{j,i} lambda_j^{d_i} e^{-i d_i (pi-lambda_j)/2}.
Eigen::MatrixXcd rescaled_dft(const LocalData& data, const Eigen::VectorXd& d) {
    const Eigen::Index m = data.dft.rows();
    const Eigen::Index p = data.dft.cols();
    Eigen::MatrixXcd w(m, p);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < p; ++i)
            w(j, i) = data.dft(j, i) * std::polar(std::exp(d(i) * data.log_lambda(j)),
                                                  -d(i) * data.half_angle(j));
    return w;
}

Eigen::MatrixXd g_hat_impl(const LocalData& data, const Eigen::MatrixXcd& w) {
    const Eigen::Index m = data.dft.rows();
    const Eigen::Index p = data.dft.cols();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index h = 0; h < p; ++h)
            for (Eigen::Index k = 0; k <= h; ++k)
                g(h, k) += std::real(w(j, h) * std::conj(w(j, k)));
    g /= static_cast<double>(m);
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
    return g;
}

Eigen::LLT<Eigen::MatrixXd> factor_or_throw(const Eigen::MatrixXd& g) {
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw degeneracy_error("degenerate local covariance");
    return llt;
}

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double objective_impl(const LocalData& data, const Eigen::VectorXd& d) {
    const Eigen::MatrixXcd w = rescaled_dft(data, d);
    const auto llt = factor_or_throw(g_hat_impl(data, w));
    return log_det(llt) - 2.0 * d.sum() * data.mean_log_lambda;
}

Eigen::VectorXd gradient_impl(const LocalData& data, const Eigen::VectorXd& d) {
    const Eigen::Index m = data.dft.rows();
    const Eigen::Index p = data.dft.cols();
    const Eigen::MatrixXcd w = rescaled_dft(data, d);
    const auto llt = factor_or_throw(g_hat_impl(data, w));
    const Eigen::MatrixXd g_inv =
        llt.solve(Eigen::MatrixXd::Identity(p, p));

    // dG/dd_l has row and column l equal to r_l, where
    //   r_l(k) = (1/m) sum_j Re[(log lambda_j - i (pi-lambda_j)/2) w_{j,l} conj(w_{j,k})],
    // so the trace term reduces to 2 (G^{-1} r_l)_l.
    Eigen::VectorXd grad(p);
    Eigen::VectorXd r(p);
    for (Eigen::Index l = 0; l < p; ++l) {
        r.setZero();
        for (Eigen::Index j = 0; j < m; ++j) {
            const std::complex<double> c_minus(data.log_lambda(j), -data.half_angle(j));
            const std::complex<double> lead = c_minus * w(j, l);
            for (Eigen::Index k = 0; k < p; ++k)
                r(k) += std::real(lead * std::conj(w(j, k)));
        }
        r /= static_cast<double>(m);
        grad(l) = 2.0 * g_inv.row(l).dot(r) - 2.0 * data.mean_log_lambda;
    }
    return grad;
}

} // namespace

Eigen::MatrixXd g_hat(const spectral::Periodogram& pg, const Eigen::VectorXd& d,
                      std::size_t m) {
    require_feasible(d);
    if (d.size() != pg.dims())
        throw validation_error("memory vector dimension does not match periodogram");
    const LocalData data = prepare(pg, m);
    return g_hat_impl(data, rescaled_dft(data, d));
}

double objective(const spectral::Periodogram& pg, const Eigen::VectorXd& d,
                 std::size_t m) {
    require_feasible(d);
    if (d.size() != pg.dims())
        throw validation_error("memory vector dimension does not match periodogram");
    return objective_impl(prepare(pg, m), d);
}

Eigen::VectorXd gradient(const spectral::Periodogram& pg, const Eigen::VectorXd& d,
                         std::size_t m) {
    require_feasible(d);
    if (d.size() != pg.dims())
        throw validation_error("memory vector dimension does not match periodogram");
    return gradient_impl(prepare(pg, m), d);
}

GseFit estimate(const spectral::Periodogram& pg, const GseConfig& cfg) {
    const Eigen::Index p = pg.dims();
    if (!(cfg.box_margin > 0.0 && cfg.box_margin < 0.25))
        throw validation_error("box margin must lie in (0, 1/4)");
    if (!(cfg.grad_tol > 0.0))
        throw validation_error("gradient tolerance must be positive");
    const LocalData data = prepare(pg, cfg.bandwidth);

    Eigen::VectorXd init = cfg.init;
    if (init.size() == 0) init = Eigen::VectorXd::Zero(p);
    if (init.size() != p)
        throw validation_error("initial memory vector dimension mismatch");
    const double hi = 0.5 - cfg.box_margin;
    if ((init.array().abs() > hi).any())
        throw validation_error("initial memory vector outside the optimization box");

    // Evaluate once up front so a degenerate G at the start surfaces as an
    // error instead of a failed search.
    objective_impl(data, init);

    const Eigen::VectorXd lower = Eigen::VectorXd::Constant(p, -hi);
    const Eigen::VectorXd upper = Eigen::VectorXd::Constant(p, hi);

    lbfgsb::Options opts;
    opts.max_iters = cfg.max_iters;
    opts.pg_tol = cfg.grad_tol;
    const auto callback = [&](const Eigen::VectorXd& d, Eigen::VectorXd& grad) {
        grad = gradient_impl(data, d);
        return objective_impl(data, d);
    };
    lbfgsb::Result opt = lbfgsb::minimize(callback, init, lower, upper, opts);
    if (!std::isfinite(opt.f))
        throw degeneracy_error("non-finite objective at optimizer solution");

    GseFit fit;
    fit.d_hat = opt.x;
    fit.g_hat = g_hat_impl(data, rescaled_dft(data, opt.x));
    fit.objective = opt.f;
    fit.grad_norm = opt.pg_norm;
    fit.iterations = opt.iterations;
    fit.bandwidth = cfg.bandwidth;
    fit.converged = opt.converged;
    for (Eigen::Index i = 0; i < p; ++i)
        if (opt.x(i) <= lower(i) || opt.x(i) >= upper(i)) ++fit.active_bounds;
    return fit;
}

std::vector<GridPoint> objective_grid(const spectral::Periodogram& pg, std::size_t m,
                                      const std::vector<Eigen::Index>& coords,
                                      const std::vector<Eigen::VectorXd>& grid) {
    if (grid.empty()) throw validation_error("objective grid is empty");
    if (coords.size() != 1 && coords.size() != 2)
        throw validation_error("objective grid supports 1 or 2 coordinates");
    const spectral::Periodogram sub = pg.select_coords(coords);
    const LocalData data = prepare(sub, m);

    std::vector<GridPoint> out;
    out.reserve(grid.size());
    for (const auto& d : grid) {
        if (d.size() != static_cast<Eigen::Index>(coords.size()))
            throw validation_error("grid point dimension does not match coordinates");
        require_feasible(d);
        GridPoint pt{d, std::numeric_limits<double>::quiet_NaN()};
        try {
            pt.value = objective_impl(data, d);
        } catch (const degeneracy_error&) {
            // leave NaN so plots can show the gap
        }
        out.push_back(std::move(pt));
    }
    return out;
}

double gph_estimate(const spectral::Periodogram& pg, Eigen::Index coord, std::size_t m) {
    if (m < 2) throw validation_error("log-periodogram regression requires m >= 2");
    const auto points = spectral::log_periodogram_points(pg, coord, m);
    double mean_x = 0.0, mean_y = 0.0;
    for (const auto& [x, y] : points) {
        mean_x += x;
        mean_y += y;
    }
    mean_x /= static_cast<double>(m);
    mean_y /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    return sxy / sxx;
}

} // namespace longmem::gse
