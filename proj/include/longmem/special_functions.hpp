#ifndef LONGMEM_SPECIAL_FUNCTIONS_HPP
#define LONGMEM_SPECIAL_FUNCTIONS_HPP

namespace longmem::special {

/// Standard normal CDF.
double normal_cdf(double z);

/// Standard normal upper tail P(Z > z), computed via erfc so that
/// far-tail values keep full relative accuracy.
double normal_upper_tail(double z);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Upper tail of the chi-squared distribution with df degrees of freedom.
double chi_squared_upper_tail(double df, double x);

} // namespace longmem::special

#endif
