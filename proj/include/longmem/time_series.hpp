#ifndef LONGMEM_TIME_SERIES_HPP
#define LONGMEM_TIME_SERIES_HPP

#include <Eigen/Dense>

#include "longmem/error.hpp"

namespace longmem {

/// An observed multivariate sequence: T rows (time), p columns (coordinates).
struct TimeSeries {
    Eigen::MatrixXd values;

    TimeSeries() = default;
    explicit TimeSeries(Eigen::MatrixXd v) : values(std::move(v)) {}

    Eigen::Index length() const { return values.rows(); }
    Eigen::Index dims() const { return values.cols(); }
};

/// Throws validation_error unless x has T >= 2, p >= 1 and all entries finite.
void validate(const TimeSeries& x);

} // namespace longmem

#endif
