#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "longmem/error.hpp"
#include "longmem/gse.hpp"
#include "longmem/simulate.hpp"
#include "test_helpers.hpp"

using namespace longmem;
using std::numbers::pi;

namespace {

// Dense element-by-element evaluation of the local level matrix, written
// against the materialized I(lambda_j) rather than the rank-one form.
Eigen::MatrixXd dense_g_oracle(const spectral::Periodogram& pg,
                               const Eigen::VectorXd& d, std::size_t m) {
    const Eigen::Index p = pg.dims();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t j = 0; j < m; ++j) {
        const double lambda = pg.freqs[j];
        const std::complex<double> c_minus(std::log(lambda), -(pi - lambda) / 2.0);
        const std::complex<double> c_plus = std::conj(c_minus);
        const Eigen::MatrixXcd mat = pg.matrix(j);
        for (Eigen::Index h = 0; h < p; ++h)
            for (Eigen::Index k = 0; k < p; ++k)
                g(h, k) += std::real(mat(h, k) *
                                     std::exp(c_minus * d(h) + c_plus * d(k)));
    }
    return g / static_cast<double>(m);
}

Eigen::VectorXd fd_gradient(const spectral::Periodogram& pg, const Eigen::VectorXd& d,
                            std::size_t m, double h = 1e-5) {
    Eigen::VectorXd g(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        Eigen::VectorXd up = d, down = d;
        up(i) += h;
        down(i) -= h;
        g(i) = (gse::objective(pg, up, m) - gse::objective(pg, down, m)) / (2.0 * h);
    }
    return g;
}

double grid_argmin(const spectral::Periodogram& pg, std::size_t m, double step = 1e-3) {
    double best_d = 0.0;
    double best_v = std::numeric_limits<double>::infinity();
    for (double d = -0.499; d <= 0.499; d += step) {
        Eigen::VectorXd v(1);
        v << d;
        const double val = gse::objective(pg, v, m);
        if (val < best_v) {
            best_v = val;
            best_d = d;
        }
    }
    return best_d;
}

Eigen::VectorXd vec1(double v) {
    Eigen::VectorXd d(1);
    d << v;
    return d;
}

} // namespace

TEST_SUITE("gse") {

TEST_CASE("lambda_diag: zero memory gives the pure phase factor") {
    const double lambda = 0.7;
    const auto entries = gse::lambda_diag(lambda, Eigen::VectorXd::Zero(3));
    const std::complex<double> expected = std::polar(1.0, (pi - lambda) / 2.0);
    for (Eigen::Index i = 0; i < 3; ++i) {
        CHECK(std::abs(entries(i) - expected) <= 1e-15);
        CHECK(std::abs(std::abs(entries(i)) - 1.0) <= 1e-15);
    }
}

TEST_CASE("lambda_diag: at lambda = pi the phase vanishes") {
    Eigen::VectorXd d(2);
    d << 0.3, -0.2;
    const auto entries = gse::lambda_diag(pi, d);
    for (Eigen::Index i = 0; i < 2; ++i) {
        CHECK(entries(i).imag() == 0.0);
        CHECK(entries(i).real() == doctest::Approx(std::pow(pi, -d(i))).epsilon(1e-14));
    }
}

TEST_CASE("lambda_diag: modulus is lambda^{-d}") {
    const auto entries = gse::lambda_diag(pi / 2.0, vec1(0.25));
    CHECK(std::abs(entries(0)) == doctest::Approx(std::pow(pi / 2.0, -0.25)).epsilon(1e-12));
    CHECK(std::abs(entries(0)) == doctest::Approx(0.8932).epsilon(1e-4));
}

TEST_CASE("lambda_diag: non-positive frequency is rejected") {
    CHECK_THROWS_AS(gse::lambda_diag(0.0, vec1(0.1)), validation_error);
    CHECK_THROWS_AS(gse::lambda_diag(-1.0, vec1(0.1)), validation_error);
}

TEST_CASE("g_hat: scalar case at d = 0 is the periodogram average") {
    const auto pg = test_helpers::random_periodogram(512, 64, 1, 21);
    const auto g = gse::g_hat(pg, Eigen::VectorXd::Zero(1), 64);
    double mean = 0.0;
    for (std::size_t j = 0; j < 64; ++j) mean += pg.diagonal(j, 0);
    mean /= 64.0;
    CHECK(g(0, 0) == doctest::Approx(mean).epsilon(1e-13));
}

TEST_CASE("g_hat: zero periodogram gives the zero matrix") {
    const auto pg = test_helpers::synthetic_periodogram(128, Eigen::MatrixXcd::Zero(16, 2));
    CHECK(gse::g_hat(pg, Eigen::VectorXd::Zero(2), 16).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("g_hat: repeated complex vector at d = 0, against a hand-rolled loop") {
    Eigen::MatrixXcd dft(32, 2);
    const std::complex<double> y0(0.7, -0.4), y1(-0.2, 1.1);
    for (Eigen::Index j = 0; j < 32; ++j) {
        dft(j, 0) = y0;
        dft(j, 1) = y1;
    }
    const auto pg = test_helpers::synthetic_periodogram(256, dft);
    const Eigen::VectorXd d = Eigen::VectorXd::Zero(2);
    const auto g = gse::g_hat(pg, d, 32);

    // Direct average of Re[D^{-1} y y* D^{-*}] with D the common phase factor.
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2, 2);
    for (std::size_t j = 0; j < 32; ++j) {
        const auto entries = gse::lambda_diag(pg.freqs[j], d);
        Eigen::VectorXcd w(2);
        w(0) = pg.dft(static_cast<Eigen::Index>(j), 0) / entries(0);
        w(1) = pg.dft(static_cast<Eigen::Index>(j), 1) / entries(1);
        expected += (w * w.adjoint()).real();
    }
    expected /= 32.0;
    CHECK((g - expected).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((g - g.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("g_hat: matches the dense element oracle on random multivariate input") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const auto pg = test_helpers::random_periodogram(1024, 48, 3, seed);
        Eigen::VectorXd d(3);
        d << 0.35, -0.15, 0.05;
        const auto fast = gse::g_hat(pg, d, 48);
        const auto dense = dense_g_oracle(pg, d, 48);
        CHECK((fast - dense).cwiseAbs().maxCoeff() <= 1e-12 * dense.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("objective: flat spectrum is minimized exactly at zero") {
    const auto pg = test_helpers::power_law_periodogram(2048, 256, 0.0, 2.5);
    CHECK(grid_argmin(pg, 256, 0.01) == doctest::Approx(0.0).epsilon(0.02));
    const double at_zero = gse::objective(pg, vec1(0.0), 256);
    for (double d : {-0.3, -0.05, 0.05, 0.3})
        CHECK(gse::objective(pg, vec1(d), 256) > at_zero);
}

TEST_CASE("objective: power law is minimized at its exponent") {
    for (double delta : {-0.3, 0.1, 0.25}) {
        const auto pg = test_helpers::power_law_periodogram(2048, 256, delta);
        CHECK(std::fabs(grid_argmin(pg, 256) - delta) <= 2e-3);
    }
}

TEST_CASE("objective: at d = 0 only the log-determinant term remains") {
    const auto pg = test_helpers::random_periodogram(512, 40, 2, 5);
    const Eigen::VectorXd d0 = Eigen::VectorXd::Zero(2);
    const auto g = gse::g_hat(pg, d0, 40);
    CHECK(gse::objective(pg, d0, 40) ==
          doctest::Approx(std::log(g.determinant())).epsilon(1e-12));
}

TEST_CASE("objective: degenerate local covariance raises") {
    Eigen::MatrixXcd dft = Eigen::MatrixXcd::Zero(16, 2);
    for (Eigen::Index j = 0; j < 16; ++j) dft(j, 0) = 1.0; // second coordinate empty
    const auto pg = test_helpers::synthetic_periodogram(128, dft);
    CHECK_THROWS_WITH_AS(gse::objective(pg, Eigen::VectorXd::Zero(2), 16),
                         doctest::Contains("degenerate"), degeneracy_error);
}

TEST_CASE("gradient: vanishes at the exact power-law minimizer") {
    const double delta = 0.25;
    const auto pg = test_helpers::power_law_periodogram(4096, 512, delta);
    const auto g = gse::gradient(pg, vec1(delta), 512);
    CHECK(std::fabs(g(0)) <= 1e-8);
}

TEST_CASE("gradient: matches central finite differences on random problems") {
    std::uint64_t seed = 100;
    for (Eigen::Index p : {1, 2, 5}) {
        for (int rep = 0; rep < 4; ++rep) {
            const auto pg = test_helpers::random_periodogram(1024, 64, p, seed++);
            rng::GaussianStream stream(seed);
            Eigen::VectorXd d(p);
            for (Eigen::Index i = 0; i < p; ++i)
                d(i) = 0.8 * (stream.next_uniform() - 0.5);
            const Eigen::VectorXd analytic = gse::gradient(pg, d, 64);
            const Eigen::VectorXd numeric = fd_gradient(pg, d, 64);
            const double rel = (analytic - numeric).norm() / numeric.norm();
            CHECK(rel <= 1e-6);
        }
    }
}

TEST_CASE("gradient: diagonal problems decouple across coordinates") {
    // Interleaved support: coordinate 0 lives on even j, coordinate 1 on odd j,
    // so every I(lambda_j) is diagonal.
    const Eigen::Index n_freq = 64;
    Eigen::MatrixXcd dft = Eigen::MatrixXcd::Zero(n_freq, 2);
    rng::GaussianStream stream(55);
    for (Eigen::Index j = 0; j < n_freq; ++j)
        dft(j, j % 2) = std::complex<double>(stream.next(), stream.next());
    const auto pg = test_helpers::synthetic_periodogram(512, dft);

    Eigen::VectorXd d(2);
    d << 0.2, -0.1;
    const Eigen::VectorXd joint = gse::gradient(pg, d, n_freq);

    const auto sub0 = pg.select_coords({0});
    const auto sub1 = pg.select_coords({1});
    CHECK(joint(0) == doctest::Approx(gse::gradient(sub0, vec1(d(0)), n_freq)(0)).epsilon(1e-10));
    CHECK(joint(1) == doctest::Approx(gse::gradient(sub1, vec1(d(1)), n_freq)(0)).epsilon(1e-10));
}

TEST_CASE("estimate: exact power law recovered to 1e-4") {
    const auto pg = test_helpers::power_law_periodogram(4096, 512, 0.25);
    gse::GseConfig cfg;
    cfg.bandwidth = 512;
    const auto fit = gse::estimate(pg, cfg);
    CHECK(fit.converged);
    CHECK(std::fabs(fit.d_hat(0) - 0.25) <= 1e-4);
    CHECK(fit.objective <= gse::objective(pg, Eigen::VectorXd::Zero(1), 512));
}

TEST_CASE("estimate: flat spectrum pins the null to 1e-6") {
    const auto pg = test_helpers::power_law_periodogram(4096, 512, 0.0, 0.7);
    gse::GseConfig cfg;
    cfg.bandwidth = 512;
    cfg.init = vec1(0.3);
    const auto fit = gse::estimate(pg, cfg);
    CHECK(fit.converged);
    CHECK(std::fabs(fit.d_hat(0)) <= 1e-6);
}

TEST_CASE("estimate: simulated long memory lands within the sampling band") {
    const simulate::FracDiffSpec spec{0.4, 1 << 14, std::nullopt, 1.0, 12345};
    const auto pg = spectral::periodogram(simulate::fracdiff_noise(spec));
    gse::GseConfig cfg;
    cfg.bandwidth = 128;
    const auto fit = gse::estimate(pg, cfg);
    CHECK(fit.converged);
    CHECK(std::fabs(fit.d_hat(0) - 0.4) <= 0.133);
}

TEST_CASE("estimate: degenerate start is reported as such") {
    const auto pg = test_helpers::synthetic_periodogram(128, Eigen::MatrixXcd::Zero(16, 1));
    gse::GseConfig cfg;
    cfg.bandwidth = 16;
    CHECK_THROWS_AS(gse::estimate(pg, cfg), degeneracy_error);
}

TEST_CASE("estimate: bandwidth below dimension degenerates") {
    const auto pg = test_helpers::random_periodogram(512, 32, 5, 9);
    gse::GseConfig cfg;
    cfg.bandwidth = 3; // fewer ordinates than coordinates
    CHECK_THROWS_AS(gse::estimate(pg, cfg), degeneracy_error);
}

TEST_CASE("invariant: rescaling the series shifts the objective, not the argmin") {
    const simulate::MultiFdSpec spec{(Eigen::VectorXd(2) << 0.3, 0.1).finished(),
                                     1 << 12, std::nullopt, 1.0, 77};
    const TimeSeries x = simulate::multivariate_fd(spec);
    TimeSeries scaled = x;
    const double c = 3.7;
    scaled.values *= c;

    const auto pg_a = spectral::periodogram(x);
    const auto pg_b = spectral::periodogram(scaled);
    const std::size_t m = 64;
    Eigen::VectorXd d(2);
    d << 0.2, -0.05;
    CHECK(gse::objective(pg_b, d, m) ==
          doctest::Approx(gse::objective(pg_a, d, m) + 2.0 * std::log(c * c)).epsilon(1e-10));

    gse::GseConfig cfg;
    cfg.bandwidth = m;
    const auto fit_a = gse::estimate(pg_a, cfg);
    const auto fit_b = gse::estimate(pg_b, cfg);
    CHECK((fit_a.d_hat - fit_b.d_hat).lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("invariant: permuting coordinates permutes the estimate") {
    const simulate::MultiFdSpec spec{(Eigen::VectorXd(3) << 0.35, 0.0, -0.2).finished(),
                                     1 << 12, std::nullopt, 1.0, 99};
    const TimeSeries x = simulate::multivariate_fd(spec);
    Eigen::MatrixXd permuted(x.length(), 3);
    permuted.col(0) = x.values.col(2);
    permuted.col(1) = x.values.col(0);
    permuted.col(2) = x.values.col(1);

    gse::GseConfig cfg;
    cfg.bandwidth = 64;
    const auto fit = gse::estimate(spectral::periodogram(x), cfg);
    const auto fit_p = gse::estimate(spectral::periodogram(TimeSeries(permuted)), cfg);
    CHECK(fit_p.d_hat(0) == doctest::Approx(fit.d_hat(2)).epsilon(1e-5));
    CHECK(fit_p.d_hat(1) == doctest::Approx(fit.d_hat(0)).epsilon(1e-5));
    CHECK(fit_p.d_hat(2) == doctest::Approx(fit.d_hat(1)).epsilon(1e-5));
}

TEST_CASE("invariant: joint fit of a diagonal problem equals marginal fits") {
    const Eigen::Index n_freq = 96;
    Eigen::MatrixXcd dft = Eigen::MatrixXcd::Zero(n_freq, 2);
    for (Eigen::Index j = 0; j < n_freq; ++j) {
        const double lambda = 2.0 * pi * static_cast<double>(j + 1) / 1024.0;
        if (j % 2 == 0)
            dft(j, 0) = std::pow(lambda, -0.3);
        else
            dft(j, 1) = std::pow(lambda, 0.1);
    }
    const auto pg = test_helpers::synthetic_periodogram(1024, dft);

    gse::GseConfig cfg;
    cfg.bandwidth = n_freq;
    const auto joint = gse::estimate(pg, cfg);
    const auto fit0 = gse::estimate(pg.select_coords({0}), cfg);
    const auto fit1 = gse::estimate(pg.select_coords({1}), cfg);
    CHECK(std::fabs(joint.d_hat(0) - fit0.d_hat(0)) <= 1e-4);
    CHECK(std::fabs(joint.d_hat(1) - fit1.d_hat(0)) <= 1e-4);
}

TEST_CASE("objective_grid: agrees with the fit objective at the fitted point") {
    const auto pg = test_helpers::power_law_periodogram(2048, 128, 0.2);
    gse::GseConfig cfg;
    cfg.bandwidth = 128;
    const auto fit = gse::estimate(pg, cfg);
    const auto grid = gse::objective_grid(pg, 128, {0}, {fit.d_hat});
    REQUIRE(grid.size() == 1);
    CHECK(grid[0].value == doctest::Approx(fit.objective).epsilon(1e-14));
}

TEST_CASE("objective_grid: flat spectrum has its unique minimum at zero") {
    const auto pg = test_helpers::power_law_periodogram(2048, 128, 0.0);
    std::vector<Eigen::VectorXd> grid;
    for (double d = -0.4; d <= 0.4001; d += 0.01) grid.push_back(vec1(d));
    const auto values = gse::objective_grid(pg, 128, {0}, grid);
    std::size_t argmin = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i].value < values[argmin].value) argmin = i;
    CHECK(std::fabs(values[argmin].d(0)) <= 5e-3);
}

TEST_CASE("objective_grid: argmin tracks the optimizer on simulated input") {
    const simulate::FracDiffSpec spec{0.2, 1 << 12, std::nullopt, 1.0, 31};
    const auto pg = spectral::periodogram(simulate::fracdiff_noise(spec));
    gse::GseConfig cfg;
    cfg.bandwidth = 64;
    const auto fit = gse::estimate(pg, cfg);

    std::vector<Eigen::VectorXd> grid;
    for (double d = -0.45; d <= 0.4501; d += 0.01) grid.push_back(vec1(d));
    const auto values = gse::objective_grid(pg, 64, {0}, grid);
    std::size_t argmin = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i].value < values[argmin].value) argmin = i;
    CHECK(std::fabs(values[argmin].d(0) - fit.d_hat(0)) <= 0.02);
}

TEST_CASE("objective_grid: degenerate points record NaN instead of failing") {
    Eigen::MatrixXcd dft = Eigen::MatrixXcd::Zero(16, 2);
    for (Eigen::Index j = 0; j < 16; ++j) dft(j, 0) = 1.0;
    const auto pg = test_helpers::synthetic_periodogram(128, dft);
    const auto values =
        gse::objective_grid(pg, 16, {0, 1}, {(Eigen::VectorXd(2) << 0.1, 0.1).finished()});
    REQUIRE(values.size() == 1);
    CHECK(std::isnan(values[0].value));
}

TEST_CASE("objective_grid: empty grid is rejected") {
    const auto pg = test_helpers::power_law_periodogram(256, 32, 0.1);
    CHECK_THROWS_AS(gse::objective_grid(pg, 32, {0}, {}), validation_error);
}

TEST_CASE("gph: exact power law is recovered to 1e-10") {
    for (double d : {-0.35, 0.0, 0.2, 0.45}) {
        const auto pg = test_helpers::power_law_periodogram(4096, 256, d, 3.0);
        CHECK(std::fabs(gse::gph_estimate(pg, 0, 256) - d) <= 1e-10);
    }
}

TEST_CASE("gph: agrees with the slope of the emitted plot points") {
    const simulate::FracDiffSpec spec{0.4, 1 << 14, std::nullopt, 1.0, 8};
    const auto pg = spectral::periodogram(simulate::fracdiff_noise(spec));
    const auto pts = spectral::log_periodogram_points(pg, 0, 128);
    double mx = 0.0, my = 0.0;
    for (const auto& [a, b] : pts) {
        mx += a;
        my += b;
    }
    mx /= 128.0;
    my /= 128.0;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [a, b] : pts) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    CHECK(gse::gph_estimate(pg, 0, 128) == doctest::Approx(sxy / sxx).epsilon(1e-12));
    CHECK(sxy / sxx >= 0.25);
    CHECK(sxy / sxx <= 0.55);
}

TEST_CASE("gph: sampling distribution centers on the truth") {
    double total = 0.0;
    const int n_trials = 60;
    for (int trial = 0; trial < n_trials; ++trial) {
        const simulate::FracDiffSpec spec{0.25, 1 << 14, std::nullopt, 1.0,
                                          9000 + static_cast<std::uint64_t>(trial)};
        const auto pg = spectral::periodogram(simulate::fracdiff_noise(spec));
        total += gse::gph_estimate(pg, 0, 128);
    }
    const double mean = total / n_trials;
    CHECK(mean >= 0.15);
    CHECK(mean <= 0.35);
}

} // TEST_SUITE
