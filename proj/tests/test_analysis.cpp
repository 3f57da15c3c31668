#include <doctest.h>

#include <cmath>
#include <numbers>

#include "longmem/analysis.hpp"
#include "longmem/error.hpp"
#include "longmem/simulate.hpp"
#include "test_helpers.hpp"

using namespace longmem;

TEST_SUITE("analysis") {

TEST_CASE("autocovariance: constant series gives zero matrices") {
    Eigen::MatrixXd v = Eigen::MatrixXd::Constant(64, 2, 3.5);
    const auto acv = analysis::autocovariance(TimeSeries(std::move(v)), 5);
    REQUIRE(acv.matrices.size() == 6);
    for (const auto& g : acv.matrices) CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("autocovariance: alternating series is exactly -(T-1)/T at lag one") {
    const Eigen::Index t_len = 64;
    Eigen::MatrixXd v(t_len, 1);
    for (Eigen::Index t = 0; t < t_len; ++t) v(t, 0) = (t % 2 == 0) ? 1.0 : -1.0;
    const auto acv = analysis::autocovariance(TimeSeries(std::move(v)), 1);
    const double ratio = acv.matrices[1](0, 0) / acv.matrices[0](0, 0);
    CHECK(ratio == doctest::Approx(-63.0 / 64.0).epsilon(1e-12));
}

TEST_CASE("autocovariance: AR(1) decay profile") {
    simulate::ArfimaSpec spec;
    spec.ar = {0.5};
    spec.length = 1 << 14;
    spec.seed = 2;
    const auto acv = analysis::autocovariance(simulate::arfima(spec), 5);
    for (std::size_t k = 1; k <= 5; ++k) {
        const double ratio = acv.matrices[k](0, 0) / acv.matrices[0](0, 0);
        CHECK(std::fabs(ratio - std::pow(0.5, static_cast<double>(k))) <= 0.05);
    }
}

TEST_CASE("autocovariance: positive semidefinite at lag zero") {
    const auto x = test_helpers::white_noise(512, 3, 77);
    const auto acv = analysis::autocovariance(x, 0);
    const Eigen::MatrixXd& g0 = acv.matrices[0];
    CHECK((g0 - g0.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g0);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("autocovariance: permuting coordinates conjugates the matrices") {
    const auto x = test_helpers::white_noise(256, 3, 5);
    Eigen::MatrixXd permuted(x.length(), 3);
    permuted.col(0) = x.values.col(1);
    permuted.col(1) = x.values.col(2);
    permuted.col(2) = x.values.col(0);
    const auto a = analysis::autocovariance(x, 3);
    const auto b = analysis::autocovariance(TimeSeries(permuted), 3);
    // permutation sending old coordinate i to new slot: 1->0, 2->1, 0->2
    const int perm[3] = {1, 2, 0};
    for (std::size_t k = 0; k <= 3; ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(b.matrices[k](i, j) ==
                      doctest::Approx(a.matrices[k](perm[i], perm[j])).epsilon(1e-13));
}

TEST_CASE("autocovariance: lag bound is validated") {
    const auto x = test_helpers::white_noise(16, 1, 1);
    CHECK_THROWS_AS(analysis::autocovariance(x, 16), validation_error);
}

TEST_CASE("trace partial sums: zero input, zero sums") {
    Eigen::MatrixXd v = Eigen::MatrixXd::Constant(32, 1, 2.0);
    const auto acv = analysis::autocovariance(TimeSeries(std::move(v)), 4);
    for (double s : analysis::acov_trace_partial_sums(acv)) CHECK(s == 0.0);
}

TEST_CASE("trace partial sums: nondecreasing on arbitrary input") {
    const auto x = test_helpers::white_noise(1024, 2, 13);
    const auto sums = analysis::acov_trace_partial_sums(analysis::autocovariance(x, 100));
    for (std::size_t k = 1; k < sums.size(); ++k) CHECK(sums[k] >= sums[k - 1]);
}

TEST_CASE("trace partial sums: white noise accumulates only at the noise floor") {
    const Eigen::Index t_len = 1 << 14;
    const auto x = test_helpers::white_noise(t_len, 1, 29);
    const auto sums = analysis::acov_trace_partial_sums(analysis::autocovariance(x, 100));
    CHECK(sums[0] >= 0.9);
    CHECK(sums[0] <= 1.1);
    // Each increment is |gamma_hat(k)| with gamma_hat(k) ~ N(0, 1/T), so the
    // sum grows by sqrt(2/(pi T)) per lag on average and no faster.
    const double floor_rate = std::sqrt(2.0 / (std::numbers::pi * t_len));
    for (std::size_t k = 1; k <= 100; ++k)
        CHECK(sums[k] - sums[k - 1] <= 8.0 * floor_rate);
    CHECK(std::fabs(sums[100] - sums[0] - 100.0 * floor_rate) <= 25.0 * floor_rate);
}

TEST_CASE("trace partial sums: long memory keeps accumulating, short memory stops") {
    const simulate::FracDiffSpec fd{0.4, 1 << 14, std::nullopt, 1.0, 51};
    simulate::ArfimaSpec ar;
    ar.ar = {0.5};
    ar.length = 1 << 14;
    ar.seed = 52;

    const auto fd_sums = analysis::acov_trace_partial_sums(
        analysis::autocovariance(simulate::fracdiff_noise(fd), 500));
    const auto ar_sums = analysis::acov_trace_partial_sums(
        analysis::autocovariance(simulate::arfima(ar), 500));
    const double fd_growth = fd_sums[500] / fd_sums[50];
    const double ar_growth = ar_sums[500] / ar_sums[50];
    CHECK(fd_growth > ar_growth);
}

TEST_CASE("theoretical FD autocorrelation: first lag and degenerate order") {
    const auto rho = analysis::fd_theoretical_acf(0.25, 3);
    CHECK(rho[0] == 1.0);
    CHECK(rho[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    const auto zero = analysis::fd_theoretical_acf(0.0, 3);
    CHECK(zero[0] == 1.0);
    CHECK(zero[1] == 0.0);
    CHECK(zero[2] == 0.0);
}

TEST_CASE("theoretical FD autocorrelation: hyperbolic tail exponent") {
    const auto rho = analysis::fd_theoretical_acf(0.4, 600);
    const double ratio = rho[512] / rho[256];
    CHECK(std::fabs(ratio - std::pow(2.0, 2.0 * 0.4 - 1.0)) <=
          0.02 * std::pow(2.0, 2.0 * 0.4 - 1.0));
}

TEST_CASE("theoretical FD autocorrelation: validates the memory range") {
    CHECK_THROWS_AS(analysis::fd_theoretical_acf(0.5, 4), validation_error);
}

TEST_CASE("simulator cross-validation: sample ACF tracks the closed form") {
    // The generated paths have mean zero by construction, so the
    // autocorrelation is taken about zero; removing an estimated mean would
    // add the well-known negative bias of order Var(mean), which at d = 0.4
    // is larger than the band checked here.
    const auto acf_about_zero = [](const TimeSeries& x, Eigen::Index lag) {
        double c0 = 0.0, ck = 0.0;
        for (Eigen::Index t = 0; t < x.length(); ++t) {
            c0 += x.values(t, 0) * x.values(t, 0);
            if (t + lag < x.length()) ck += x.values(t, 0) * x.values(t + lag, 0);
        }
        return ck / c0;
    };
    for (double d : {0.1, 0.25, 0.4}) {
        const auto rho = analysis::fd_theoretical_acf(d, 5);
        Eigen::VectorXd mean_acf = Eigen::VectorXd::Zero(5);
        const int n_seeds = 40;
        for (int s = 0; s < n_seeds; ++s) {
            const simulate::FracDiffSpec spec{d, 1 << 14, std::nullopt, 1.0,
                                              700 + static_cast<std::uint64_t>(s)};
            const TimeSeries x = simulate::fracdiff_noise(spec);
            for (Eigen::Index k = 1; k <= 5; ++k)
                mean_acf(k - 1) += acf_about_zero(x, k);
        }
        mean_acf /= static_cast<double>(n_seeds);
        for (Eigen::Index k = 1; k <= 5; ++k)
            CHECK(std::fabs(mean_acf(k - 1) - rho[static_cast<std::size_t>(k)]) <= 0.05);
    }
}

TEST_CASE("prediction horizon: AR(1) closed form") {
    const auto r2 = analysis::r_squared_horizon(analysis::Ar1Model{0.5}, {0, 1, 2, 5});
    CHECK(r2[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r2[1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(r2[2] == doctest::Approx(0.0625).epsilon(1e-12));
    CHECK(r2[3] == doctest::Approx(std::pow(0.5, 10.0)).epsilon(1e-10));
}

TEST_CASE("prediction horizon: hyperbolic beats exponential at long range") {
    const auto fd = analysis::r_squared_horizon(analysis::FdModel{0.4}, {0, 50});
    const auto ar = analysis::r_squared_horizon(analysis::Ar1Model{0.5}, {0, 50});
    CHECK(fd[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fd[1] > ar[1]);
    CHECK(fd[1] > 0.1);
}

TEST_CASE("prediction horizon: nonincreasing in the horizon") {
    for (const analysis::PredictionModel& model :
         {analysis::PredictionModel{analysis::Ar1Model{0.8}},
          analysis::PredictionModel{analysis::FdModel{0.3}}}) {
        std::vector<std::size_t> horizons;
        for (std::size_t h = 0; h <= 40; ++h) horizons.push_back(h);
        const auto r2 = analysis::r_squared_horizon(model, horizons);
        for (std::size_t i = 1; i < r2.size(); ++i) CHECK(r2[i] <= r2[i - 1] + 1e-15);
    }
}

} // TEST_SUITE
