#ifndef LONGMEM_LBFGSB_HPP
#define LONGMEM_LBFGSB_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace longmem::lbfgsb {

/// Objective callback: returns f(x) and fills grad (same size as x).
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct Options {
    std::size_t max_iters = 500;
    double pg_tol = 1e-8; // sup-norm of the projected gradient
    int history = 8;
    std::size_t max_line_search_evals = 40;
};

struct Result {
    Eigen::VectorXd x;
    double f = 0.0;
    Eigen::VectorXd grad;
    double pg_norm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t n_evals = 0;
};

/// Limited-memory BFGS with box constraints: quadratic model over a compact
/// inverse-Hessian representation, generalized Cauchy point, subspace
/// minimization over the free variables, and a strong Wolfe line search.
Result minimize(const Objective& objective, Eigen::VectorXd x0,
                const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                const Options& options = {});

} // namespace longmem::lbfgsb

#endif
