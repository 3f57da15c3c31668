#include "longmem/inference.hpp"

#include <cmath>
#include <numbers>

#include "longmem/error.hpp"
#include "longmem/special_functions.hpp"

namespace longmem::inference {

using std::numbers::pi;

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw validation_error("test level alpha must lie in (0, 1]");
}

double tail_probability(double z, Alternative alternative) {
    switch (alternative) {
        case Alternative::greater: return special::normal_upper_tail(z);
        case Alternative::less: return special::normal_cdf(z);
        case Alternative::two_sided: return 2.0 * special::normal_upper_tail(std::fabs(z));
    }
    return 1.0;
}

} // namespace

Eigen::MatrixXd omega(const Eigen::MatrixXd& g) {
    if (g.rows() != g.cols() || g.rows() < 1)
        throw validation_error("G must be a square matrix");
    if (!g.isApprox(g.transpose(), 1e-10))
        throw validation_error("G must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw degeneracy_error("G is not positive definite");
    const Eigen::Index p = g.rows();
    const Eigen::MatrixXd g_inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd had = g.cwiseProduct(g_inv);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(p, p);
    return 2.0 * (eye + had + (pi * pi / 4.0) * (had - eye));
}

double total_memory(const Eigen::VectorXd& d_hat) {
    return d_hat.sum();
}

double normalized_total_memory(const Eigen::VectorXd& d_hat) {
    if (d_hat.size() < 1) throw validation_error("memory vector is empty");
    return d_hat.sum() / static_cast<double>(d_hat.size());
}

double total_memory_variance(const Eigen::MatrixXd& g_hat, std::size_t m) {
    if (m < 1) throw validation_error("bandwidth must be at least 1");
    const Eigen::MatrixXd om = omega(g_hat);
    Eigen::LLT<Eigen::MatrixXd> llt(om);
    if (llt.info() != Eigen::Success)
        throw degeneracy_error("Omega is not positive definite");
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(om.rows());
    return ones.dot(llt.solve(ones)) / static_cast<double>(m);
}

TestResult total_memory_test(const gse::GseFit& fit, double null_value,
                             Alternative alternative, double alpha) {
    check_alpha(alpha);
    if (!fit.converged)
        throw validation_error("estimator did not converge; refusing to test");
    const double variance = total_memory_variance(fit.g_hat, fit.bandwidth);
    if (!(variance > 0.0))
        throw degeneracy_error("non-positive plug-in variance");
    const double z = (total_memory(fit.d_hat) - null_value) / std::sqrt(variance);

    TestResult result;
    result.statistic = z;
    result.p_value = tail_probability(z, alternative);
    result.alpha = alpha;
    result.reject = result.p_value < alpha;
    result.alternative = alternative;
    result.df_or_variance = variance;
    return result;
}

TestResult wald_test(const gse::GseFit& fit, const Eigen::VectorXd& d0, double alpha) {
    check_alpha(alpha);
    if (!fit.converged)
        throw validation_error("estimator did not converge; refusing to test");
    if (d0.size() != fit.d_hat.size())
        throw validation_error("null vector dimension mismatch");
    const Eigen::MatrixXd om = omega(fit.g_hat);
    const Eigen::VectorXd diff = fit.d_hat - d0;
    const double statistic =
        static_cast<double>(fit.bandwidth) * diff.dot(om * diff);
    const double p = static_cast<double>(fit.d_hat.size());

    TestResult result;
    result.statistic = statistic;
    result.p_value = special::chi_squared_upper_tail(p, statistic);
    result.alpha = alpha;
    result.reject = result.p_value < alpha;
    result.alternative = Alternative::greater;
    result.df_or_variance = p;
    return result;
}

} // namespace longmem::inference
