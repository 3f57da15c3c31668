#ifndef LONGMEM_SIMULATE_HPP
#define LONGMEM_SIMULATE_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "longmem/time_series.hpp"

namespace longmem::simulate {

/// Fractionally differenced Gaussian white noise. burn_in defaults to the
/// output length, so 2T innovations feed a length-T path.
struct FracDiffSpec {
    double d = 0.0;
    std::size_t length = 0;
    std::optional<std::size_t> burn_in;
    double sigma = 1.0;
    std::uint64_t seed = 0;
};

struct ArfimaSpec {
    std::vector<double> ar;
    std::vector<double> ma;
    double d = 0.0;
    std::size_t length = 0;
    std::optional<std::size_t> burn_in;
    double sigma = 1.0;
    std::uint64_t seed = 0;
};

struct MultiFdSpec {
    Eigen::VectorXd d; // one memory parameter per coordinate
    std::size_t length = 0;
    std::optional<std::size_t> burn_in;
    double sigma = 1.0;
    std::uint64_t seed = 0;
};

enum class MfdPreset { zero, constant, subset, range };

/// Benchmark preset memory vectors: all zero; all 0.25; 10% of the
/// coordinates at 0.4; or an i.i.d. draw from 0.25 * Beta(2,2).
MultiFdSpec make_preset_spec(MfdPreset preset, Eigen::Index p, std::size_t length,
                             std::uint64_t seed);
MfdPreset parse_preset(const std::string& name);

struct MarkovSpec {
    Eigen::MatrixXd transition;     // column-stochastic: P(i,j) = p(next=i | cur=j)
    std::vector<double> output_map; // g: state -> real
    std::size_t length = 0;
    std::uint64_t seed = 0;
};

struct MtdSpec {
    std::vector<double> weights;              // positive, summing to one
    std::vector<Eigen::MatrixXd> transitions; // column-stochastic, positive diagonals
    std::vector<double> output_map;
    std::size_t length = 0;
    std::uint64_t seed = 0;
};

struct ArmaSpec {
    std::vector<double> ar;
    std::vector<double> ma;
    double sigma = 1.0;
    std::size_t length = 0;
    std::optional<std::size_t> burn_in;
    std::uint64_t seed = 0;
};

/// X_{t+1} = tanh_scale * tanh(X_t) + linear_coef * X_t + noise. The map keeps
/// sup_{|x|>r} |f(x)/x| < 1 whenever |linear_coef| < 1, so the chain mixes.
struct NonlinearArSpec {
    double tanh_scale = 1.0;
    double linear_coef = 0.0;
    double sigma = 1.0;
    std::size_t length = 0;
    std::optional<std::size_t> burn_in;
    std::uint64_t seed = 0;
};

/// Coefficients of (1-B)^{-d}: psi_0 = 1, psi_k = psi_{k-1} (k-1+d)/k.
std::vector<double> frac_diff_coeffs(double d, std::size_t n);

TimeSeries fracdiff_noise(const FracDiffSpec& spec);
TimeSeries arfima(const ArfimaSpec& spec);
TimeSeries multivariate_fd(const MultiFdSpec& spec);
TimeSeries markov_series(const MarkovSpec& spec);
TimeSeries mtd_series(const MtdSpec& spec);
TimeSeries arma_series(const ArmaSpec& spec);
TimeSeries nonlinear_ar_series(const NonlinearArSpec& spec);

} // namespace longmem::simulate

#endif
