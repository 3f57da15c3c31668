#ifndef LONGMEM_SPECTRAL_HPP
#define LONGMEM_SPECTRAL_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

#include "longmem/time_series.hpp"

namespace longmem::spectral {

/// Normalized DFT ordinates y_j at the positive Fourier frequencies
/// lambda_j = 2*pi*j/T, j = 1..floor((T-1)/2):
///
///   y_j = (2*pi*T)^(-1/2) * sum_{t=1..T} x_t e^{-i lambda_j t}
///
/// coeffs is (number of frequencies) x p, row j-1 holding y_j.
struct FourierCoefficients {
    std::vector<double> freqs;
    Eigen::MatrixXcd coeffs;
};

/// Rank-one spectral matrix estimates I(lambda_j) = y_j y_j^*. Only the DFT
/// ordinates are stored; matrices are materialized on demand.
struct Periodogram {
    std::vector<double> freqs;
    Eigen::MatrixXcd dft; // same layout as FourierCoefficients::coeffs

    std::size_t size() const { return freqs.size(); }
    Eigen::Index dims() const { return dft.cols(); }

    /// I(lambda_j) for the j-th stored frequency (0-based).
    Eigen::MatrixXcd matrix(std::size_t j) const;

    /// Diagonal entry I_{cc}(lambda_j) = |y_{j,c}|^2.
    double diagonal(std::size_t j, Eigen::Index coord) const;

    /// Periodogram of the sub-series restricted to the given coordinates.
    Periodogram select_coords(const std::vector<Eigen::Index>& coords) const;
};

/// Subtracts each column's sample mean. Idempotent.
TimeSeries demean(const TimeSeries& x);

/// DFT at the positive Fourier frequencies below pi. Does not demean;
/// throws validation_error if T < 3 (no such frequency exists).
FourierCoefficients dft(const TimeSeries& x);

/// Demeans, transforms, and forms I(lambda_j) = y_j y_j^*.
Periodogram periodogram(const TimeSeries& x);

/// Points (-2 log lambda_j, log I_{cc}(lambda_j)) for j = 1..m. The memory
/// parameter is the asymptotic slope of this curve as lambda -> 0.
std::vector<std::pair<double, double>>
log_periodogram_points(const Periodogram& pg, Eigen::Index coord, std::size_t m);

/// Centered moving average of the diagonal ordinates over a window of
/// 2*halfwidth+1 points, truncated at the boundaries. Returns (freq, value).
std::vector<std::pair<double, double>>
smoothed_periodogram(const Periodogram& pg, Eigen::Index coord, std::size_t halfwidth);

} // namespace longmem::spectral

#endif
