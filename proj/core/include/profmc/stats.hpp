#pragma once

/*
 * Small statistical toolbox used by the experiment harness: the chi-square
 * CDF (for goodness-of-fit against the Wilks statistic), the two-sided
 * one-sample Kolmogorov-Smirnov distance, deterministic nearest-rank
 * quantiles, and a least-squares slope for log-log scaling fits.
 */

#include <vector>

namespace profmc {

// Regularized lower incomplete gamma P(k/2, x/2): series expansion for
// x < k+1, continued fraction otherwise. Absolute error <= 1e-10.
double chi_square_cdf(double x, int k);

// sup_t |F_N(t) - F_{chi2_k}(t)| over the sample points, the usual two-sided
// statistic max(i/N - F(x_(i)), F(x_(i)) - (i-1)/N). Needs >= 2 samples.
double ks_distance(const std::vector<double>& samples, int k);

// Nearest-rank quantile (no interpolation): the ceil(level*N)-th smallest
// value, clamped to the first for level <= 0. Deterministic by construction.
// `values` need not be sorted; the function sorts a copy.
double nearest_rank_quantile(std::vector<double> values, double level);

// Ordinary least-squares slope of y against x. Returns NaN when fewer than
// two distinct x values are given.
double least_squares_slope(const std::vector<double>& x,
                           const std::vector<double>& y);

}  // namespace profmc
