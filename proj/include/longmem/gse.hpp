#ifndef LONGMEM_GSE_HPP
#define LONGMEM_GSE_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

#include "longmem/spectral.hpp"

namespace longmem::gse {

/// Feasible set for the memory vector: the open box (-1/2, 1/2)^p.
bool is_feasible(const Eigen::VectorXd& d);
void require_feasible(const Eigen::VectorXd& d);

struct GseConfig {
    std::size_t bandwidth = 0;   // number of low frequencies entering the fit
    double box_margin = 1e-3;    // optimization box is [-1/2+margin, 1/2-margin]
    double grad_tol = 1e-8;      // projected-gradient sup-norm at convergence
    std::size_t max_iters = 500;
    Eigen::VectorXd init;        // empty means the short-memory null d = 0
};

struct GseFit {
    Eigen::VectorXd d_hat;
    Eigen::MatrixXd g_hat;      // local spectral level at d_hat
    double objective = 0.0;
    double grad_norm = 0.0;     // projected-gradient sup-norm at d_hat
    std::size_t iterations = 0;
    std::size_t bandwidth = 0;
    bool converged = false;
    int active_bounds = 0;      // coordinates pinned at the box boundary
};

/// Diagonal local transfer factor at frequency lambda: entries
/// lambda^{-d_i} e^{i(pi-lambda)/2}. Requires lambda in (0, pi].
Eigen::VectorXcd lambda_diag(double lambda, const Eigen::VectorXd& d);

/// Local spectral level matrix: the average over the first m frequencies of
/// Re[w_j w_j^*], where w_{j,i} = y_{j,i} * lambda_j^{d_i} e^{-i d_i (pi-lambda_j)/2}.
Eigen::MatrixXd g_hat(const spectral::Periodogram& pg, const Eigen::VectorXd& d,
                      std::size_t m);

/// Profile objective R(d) = log det G(d) - 2 sum_i d_i * (1/m) sum_j log lambda_j.
/// Throws degeneracy_error if G(d) is not positive definite.
double objective(const spectral::Periodogram& pg, const Eigen::VectorXd& d,
                 std::size_t m);

/// Analytic gradient of the profile objective.
Eigen::VectorXd gradient(const spectral::Periodogram& pg, const Eigen::VectorXd& d,
                         std::size_t m);

/// Box-constrained quasi-Newton minimization of the profile objective.
GseFit estimate(const spectral::Periodogram& pg, const GseConfig& cfg);

struct GridPoint {
    Eigen::VectorXd d;
    double value; // NaN where G(d) is degenerate
};

/// Objective evaluated over a grid of memory vectors, restricted to one or two
/// named coordinates of the periodogram. Output order equals input order.
std::vector<GridPoint> objective_grid(const spectral::Periodogram& pg, std::size_t m,
                                      const std::vector<Eigen::Index>& coords,
                                      const std::vector<Eigen::VectorXd>& grid);

/// Log-periodogram regression estimate: the least-squares slope of
/// log I_{cc}(lambda_j) on -2 log lambda_j over j = 1..m.
double gph_estimate(const spectral::Periodogram& pg, Eigen::Index coord, std::size_t m);

} // namespace longmem::gse

#endif
