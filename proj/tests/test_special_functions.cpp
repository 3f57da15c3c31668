#include <doctest.h>

#include <cmath>
#include <initializer_list>
#include <numbers>

#include "longmem/special_functions.hpp"

using namespace longmem;
using std::numbers::pi;

namespace {

// Series oracle for the standard normal CDF, independent of erf:
// Phi(z) = 1/2 + phi(z) * sum_{k>=0} z^{2k+1} / (1*3*...*(2k+1)).
long double normal_cdf_series(long double z) {
    const long double density = std::exp(-z * z / 2.0L) / std::sqrt(2.0L * pi);
    long double term = z;
    long double sum = 0.0L;
    for (int k = 0; k < 400; ++k) {
        sum += term;
        term *= z * z / (2.0L * static_cast<long double>(k) + 3.0L);
        if (std::fabs(term) < 1e-24L) break;
    }
    return 0.5L + density * sum;
}

// Closed-form chi-squared upper tails at small even/odd degrees of freedom.
double chi2_tail_oracle(int df, double x) {
    switch (df) {
        case 1: return std::erfc(std::sqrt(x / 2.0));
        case 2: return std::exp(-x / 2.0);
        case 3:
            return std::erfc(std::sqrt(x / 2.0)) +
                   std::sqrt(2.0 * x / pi) * std::exp(-x / 2.0);
        case 4: return std::exp(-x / 2.0) * (1.0 + x / 2.0);
        default: return -1.0;
    }
}

} // namespace

TEST_SUITE("special_functions") {

TEST_CASE("normal cdf agrees with the series oracle") {
    for (double z : {0.0, 0.31, -0.5, 1.0, -1.0, 1.6449, -1.6449, 2.5, -2.5, 4.0}) {
        const double expected = static_cast<double>(normal_cdf_series(z));
        CHECK(special::normal_cdf(z) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(special::normal_upper_tail(z) ==
              doctest::Approx(1.0 - expected).epsilon(1e-10));
    }
}

TEST_CASE("normal tails are complementary and monotone") {
    double prev = 1.0;
    for (double z = -6.0; z <= 6.0; z += 0.37) {
        const double tail = special::normal_upper_tail(z);
        CHECK(special::normal_cdf(z) + tail == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(tail < prev);
        prev = tail;
    }
}

TEST_CASE("one-sided 5% point of the standard normal") {
    CHECK(special::normal_upper_tail(1.6449) == doctest::Approx(0.05).epsilon(2e-3));
    CHECK(std::fabs(special::normal_upper_tail(1.6449) - 0.05) <= 1e-4);
}

TEST_CASE("incomplete gamma halves sum to one") {
    for (double a : {0.5, 1.0, 2.5, 10.0, 25.0})
        for (double x : {0.1, 1.0, 2.4, 9.0, 40.0})
            CHECK(special::gamma_p(a, x) + special::gamma_q(a, x) ==
                  doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("chi-squared tail matches closed forms") {
    for (int df : {1, 2, 3, 4})
        for (double x : {0.05, 0.8, 2.0, 3.8414588, 7.5, 20.0}) {
            const double expected = chi2_tail_oracle(df, x);
            CHECK(special::chi_squared_upper_tail(df, x) ==
                  doctest::Approx(expected).epsilon(1e-11));
        }
}

TEST_CASE("upper 5% point of chi-squared(1)") {
    CHECK(std::fabs(special::chi_squared_upper_tail(1.0, 3.8415) - 0.05) <= 1e-4);
}

TEST_CASE("edge values") {
    CHECK(special::gamma_p(2.0, 0.0) == 0.0);
    CHECK(special::gamma_q(2.0, 0.0) == 1.0);
    CHECK(special::chi_squared_upper_tail(5.0, -1.0) == 1.0);
    CHECK_THROWS(special::gamma_p(-1.0, 1.0));
}

} // TEST_SUITE
