#pragma once

#include <cstdint>

namespace lmc {

// CDF of the standard normal distribution.
double normal_cdf(double x);

// Inverse of normal_cdf; p in (0,1).
double normal_quantile(double p);

// Regularized lower incomplete gamma P(a, x); a > 0, x >= 0.
double regularized_gamma_p(double a, double x);

// Chi-square CDF with df > 0 degrees of freedom.
double chi_square_cdf(double x, double df);

// Quantile x with chi_square_cdf(x, df) = p, solved by bracketed bisection
// on the incomplete-gamma evaluation (relative error <= 1e-8).  For df
// beyond kChiSquareBisectionDfLimit the Wilson-Hilferty transform is used
// instead; those quantiles only arise as simultaneous-interval inflation
// factors where the magnitude, not the last digit, matters.
double chi_square_quantile(double p, double df);

inline constexpr double kChiSquareBisectionDfLimit = 1e6;

// P(Binomial(n, p) <= c), exact term-by-term tail in log space.
double binomial_cdf(long long n, double p, long long c);

// Hoeffding half-width sqrt(ln(2/alpha) / (2n)) for a mean in [0,1].
double hoeffding_halfwidth(std::uint64_t n, double alpha);

}  // namespace lmc
