#include "longmem/analysis.hpp"

#include <cmath>

#include "longmem/error.hpp"
#include "longmem/simulate.hpp"
#include "longmem/spectral.hpp"

namespace longmem::analysis {

AutocovSequence autocovariance(const TimeSeries& x, std::size_t max_lag) {
    validate(x);
    const Eigen::Index t_len = x.length();
    if (static_cast<Eigen::Index>(max_lag) >= t_len)
        throw validation_error("max_lag must be smaller than the series length");

    const Eigen::MatrixXd v = spectral::demean(x).values;
    AutocovSequence out;
    out.matrices.reserve(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        const Eigen::Index n = t_len - static_cast<Eigen::Index>(k);
        out.matrices.push_back(
            (v.topRows(n).transpose() * v.middleRows(static_cast<Eigen::Index>(k), n)) /
            static_cast<double>(t_len));
    }
    return out;
}

std::vector<double> acov_trace_partial_sums(const AutocovSequence& acv) {
    std::vector<double> sums;
    sums.reserve(acv.matrices.size());
    double acc = 0.0;
    for (const auto& gamma : acv.matrices) {
        acc += gamma.diagonal().array().abs().sum();
        sums.push_back(acc);
    }
    return sums;
}

std::vector<double> fd_theoretical_acf(double d, std::size_t max_lag) {
    if (!(std::fabs(d) < 0.5))
        throw validation_error("memory parameter must lie in (-1/2, 1/2)");
    std::vector<double> rho(max_lag + 1);
    rho[0] = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        if (d == 0.0) {
            rho[k] = 0.0;
            continue;
        }
        const double kk = static_cast<double>(k);
        rho[k] = rho[k - 1] * (kk - 1.0 + d) / (kk - d);
    }
    return rho;
}

std::vector<double> r_squared_horizon(const PredictionModel& model,
                                      const std::vector<std::size_t>& horizons) {
    // 1e5 terms bound the neglected tail by ~N^{2d-1}/(1-2d) relative for the
    // fractionally differenced family with |d| <= 0.45, i.e. below 1e-3 of
    // the h=0 total for the horizons exercised here.
    constexpr std::size_t kTerms = 100000;
    std::vector<double> coeffs;
    if (const auto* ar = std::get_if<Ar1Model>(&model)) {
        if (!(std::fabs(ar->phi) < 1.0))
            throw validation_error("AR(1) coefficient must satisfy |phi| < 1");
        coeffs.resize(kTerms);
        double v = 1.0;
        for (std::size_t j = 0; j < kTerms; ++j) {
            coeffs[j] = v;
            v *= ar->phi;
        }
    } else {
        const auto& fd = std::get<FdModel>(model);
        if (!(std::fabs(fd.d) < 0.5))
            throw validation_error("memory parameter must lie in (-1/2, 1/2)");
        coeffs = simulate::frac_diff_coeffs(fd.d, kTerms);
    }

    // Suffix sums of squared impulse responses, accumulated from the tail.
    std::vector<double> suffix(kTerms + 1, 0.0);
    for (std::size_t j = kTerms; j-- > 0;)
        suffix[j] = suffix[j + 1] + coeffs[j] * coeffs[j];

    std::vector<double> out;
    out.reserve(horizons.size());
    for (std::size_t h : horizons)
        out.push_back(h >= kTerms ? 0.0 : suffix[h] / suffix[0]);
    return out;
}

} // namespace longmem::analysis
