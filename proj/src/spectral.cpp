#include "longmem/spectral.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "longmem/fft.hpp"

namespace longmem {

void validate(const TimeSeries& x) {
    if (x.length() < 2)
        throw validation_error("time series must have at least 2 observations");
    if (x.dims() < 1)
        throw validation_error("time series must have at least 1 coordinate");
    if (!x.values.allFinite())
        throw validation_error("time series contains non-finite values");
}

namespace spectral {

using std::numbers::pi;

Eigen::MatrixXcd Periodogram::matrix(std::size_t j) const {
    const Eigen::VectorXcd y = dft.row(static_cast<Eigen::Index>(j)).transpose();
    return y * y.adjoint();
}

double Periodogram::diagonal(std::size_t j, Eigen::Index coord) const {
    return std::norm(dft(static_cast<Eigen::Index>(j), coord));
}

Periodogram Periodogram::select_coords(const std::vector<Eigen::Index>& coords) const {
    Periodogram out;
    out.freqs = freqs;
    out.dft.resize(dft.rows(), static_cast<Eigen::Index>(coords.size()));
    for (std::size_t c = 0; c < coords.size(); ++c) {
        if (coords[c] < 0 || coords[c] >= dims())
            throw validation_error("coordinate index out of range");
        out.dft.col(static_cast<Eigen::Index>(c)) = dft.col(coords[c]);
    }
    return out;
}

TimeSeries demean(const TimeSeries& x) {
    validate(x);
    Eigen::MatrixXd v = x.values;
    // Two passes so the residual mean is O(eps) even for long columns.
    v.rowwise() -= v.colwise().mean();
    v.rowwise() -= v.colwise().mean();
    return TimeSeries(std::move(v));
}

FourierCoefficients dft(const TimeSeries& x) {
    validate(x);
    const Eigen::Index t_len = x.length();
    const Eigen::Index p = x.dims();
    if (t_len < 3)
        throw validation_error("DFT requires T >= 3: no Fourier frequency in (0, pi)");

    const std::size_t n_freq = static_cast<std::size_t>((t_len - 1) / 2);
    FourierCoefficients fc;
    fc.freqs.resize(n_freq);
    fc.coeffs.resize(static_cast<Eigen::Index>(n_freq), p);

    const double norm = 1.0 / std::sqrt(2.0 * pi * static_cast<double>(t_len));
    std::vector<double> column(static_cast<std::size_t>(t_len));
    for (Eigen::Index c = 0; c < p; ++c) {
        for (Eigen::Index t = 0; t < t_len; ++t)
            column[static_cast<std::size_t>(t)] = x.values(t, c);
        const auto bins = fft::real_dft_half(column);
        for (std::size_t j = 1; j <= n_freq; ++j) {
            const double lambda = 2.0 * pi * static_cast<double>(j) / static_cast<double>(t_len);
            // The transform sums over t = 0..T-1; the defining sum starts at
            // t = 1, contributing one extra phase factor e^{-i lambda}.
            fc.coeffs(static_cast<Eigen::Index>(j - 1), c) =
                norm * std::polar(1.0, -lambda) * bins[j];
        }
    }
    for (std::size_t j = 1; j <= n_freq; ++j)
        fc.freqs[j - 1] = 2.0 * pi * static_cast<double>(j) / static_cast<double>(t_len);
    return fc;
}

Periodogram periodogram(const TimeSeries& x) {
    const FourierCoefficients fc = dft(demean(x));
    Periodogram pg;
    pg.freqs = fc.freqs;
    pg.dft = fc.coeffs;
    return pg;
}

std::vector<std::pair<double, double>>
log_periodogram_points(const Periodogram& pg, Eigen::Index coord, std::size_t m) {
    if (coord < 0 || coord >= pg.dims())
        throw validation_error("coordinate index out of range");
    if (m < 1 || m > pg.size())
        throw validation_error("number of points must be in [1, number of frequencies]");

    std::vector<std::pair<double, double>> points;
    points.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double ordinate = pg.diagonal(j, coord);
        if (ordinate <= 0.0)
            throw degeneracy_error("zero periodogram ordinate at frequency index " +
                                   std::to_string(j + 1));
        points.emplace_back(-2.0 * std::log(pg.freqs[j]), std::log(ordinate));
    }
    return points;
}

std::vector<std::pair<double, double>>
smoothed_periodogram(const Periodogram& pg, Eigen::Index coord, std::size_t halfwidth) {
    if (coord < 0 || coord >= pg.dims())
        throw validation_error("coordinate index out of range");

    const std::size_t n = pg.size();
    std::vector<std::pair<double, double>> out;
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t lo = j >= halfwidth ? j - halfwidth : 0;
        const std::size_t hi = std::min(n - 1, j + halfwidth);
        double acc = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) acc += pg.diagonal(k, coord);
        out.emplace_back(pg.freqs[j], acc / static_cast<double>(hi - lo + 1));
    }
    return out;
}

} // namespace spectral
} // namespace longmem
