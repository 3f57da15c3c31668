#ifndef LONGMEM_ANALYSIS_HPP
#define LONGMEM_ANALYSIS_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <variant>
#include <vector>

#include "longmem/time_series.hpp"

namespace longmem::analysis {

/// Sample autocovariance matrices gamma(0..max_lag), 1/T normalization.
struct AutocovSequence {
    std::vector<Eigen::MatrixXd> matrices;
};

AutocovSequence autocovariance(const TimeSeries& x, std::size_t max_lag);

/// Cumulative sums S_K = sum_{k<=K} Tr(|gamma(k)|), elementwise absolute
/// value. Divergence of this sequence is the time-domain face of long memory.
std::vector<double> acov_trace_partial_sums(const AutocovSequence& acv);

/// Closed-form autocorrelation of a fractionally differenced process:
/// rho(0) = 1, rho(k) = rho(k-1) (k-1+d)/(k-d).
std::vector<double> fd_theoretical_acf(double d, std::size_t max_lag);

struct Ar1Model {
    double phi = 0.0;
};
struct FdModel {
    double d = 0.0;
};
using PredictionModel = std::variant<Ar1Model, FdModel>;

/// Proportion of variance explained by the optimal h-step predictor,
/// computed from the impulse-response tail: R^2(h) = sum_{j>=h} a_j^2 /
/// sum_{j>=0} a_j^2, with the series truncated at 1e5 terms.
std::vector<double> r_squared_horizon(const PredictionModel& model,
                                      const std::vector<std::size_t>& horizons);

} // namespace longmem::analysis

#endif
