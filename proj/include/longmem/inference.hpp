#ifndef LONGMEM_INFERENCE_HPP
#define LONGMEM_INFERENCE_HPP

#include <Eigen/Dense>

#include <cstddef>

#include "longmem/gse.hpp"

namespace longmem::inference {

enum class Alternative { greater, less, two_sided };

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    bool reject = false;
    Alternative alternative = Alternative::greater;
    // chi-squared degrees of freedom, or the plug-in variance of the
    // total-memory statistic, depending on the test.
    double df_or_variance = 0.0;
};

/// Asymptotic precision matrix of sqrt(m) (d_hat - d0):
///   Omega = 2 [ I + G@G^{-1} + (pi^2/4)(G@G^{-1} - I) ],  @ = Hadamard product.
Eigen::MatrixXd omega(const Eigen::MatrixXd& g);

/// Sum of the coordinates of the memory vector.
double total_memory(const Eigen::VectorXd& d_hat);

/// total_memory / p, comparable across dimensions.
double normalized_total_memory(const Eigen::VectorXd& d_hat);

/// Plug-in variance of the total memory: 1^T Omega(G)^{-1} 1 / m.
double total_memory_variance(const Eigen::MatrixXd& g_hat, std::size_t m);

/// Gaussian test of H0: total memory == null_value against the given
/// alternative, standardized with the plug-in variance.
TestResult total_memory_test(const gse::GseFit& fit, double null_value,
                             Alternative alternative, double alpha);

/// Wald test of H0: d == d0 with statistic m (d_hat-d0)^T Omega (d_hat-d0),
/// referred to the upper tail of chi-squared(p).
TestResult wald_test(const gse::GseFit& fit, const Eigen::VectorXd& d0, double alpha);

} // namespace longmem::inference

#endif
