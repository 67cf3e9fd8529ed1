#include "profmc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "profmc/errors.hpp"

namespace profmc {

namespace {

constexpr int kMaxIterations = 500;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

// Lower regularized gamma by its power series, valid and fast for x < a+1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < kMaxIterations; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma by modified Lentz continued fraction, for x >= a+1.
double gamma_q_cont_frac(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double regularized_gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cont_frac(a, x);
}

}  // namespace

double chi_square_cdf(double x, int k) {
  if (k < 1) throw std::invalid_argument("chi_square_cdf: k must be >= 1");
  if (!(x >= 0.0)) throw std::invalid_argument("chi_square_cdf: x must be >= 0");
  const double p = regularized_gamma_p(0.5 * k, 0.5 * x);
  return std::min(1.0, std::max(0.0, p));
}

double ks_distance(const std::vector<double>& samples, int k) {
  if (samples.size() < 2)
    throw InsufficientSamples("ks_distance: need at least 2 samples");
  std::vector<double> s(samples);
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = chi_square_cdf(std::max(0.0, s[i]), k);
    const double upper = (static_cast<double>(i) + 1.0) / n - f;
    const double lower = f - static_cast<double>(i) / n;
    dist = std::max({dist, upper, lower});
  }
  return dist;
}

double nearest_rank_quantile(std::vector<double> values, double level) {
  if (values.empty())
    throw InsufficientSamples("nearest_rank_quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  // Clamp in floating point before the cast: a negative product converted
  // to size_t would wrap instead of landing on the first rank.
  const double scaled = std::ceil(level * n);
  std::size_t rank = 1;
  if (scaled > 1.0) rank = static_cast<std::size_t>(scaled);
  if (rank > values.size()) rank = values.size();
  return values[rank - 1];
}

double least_squares_slope(const std::vector<double>& x,
                           const std::vector<double>& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("least_squares_slope: length mismatch");
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

}  // namespace profmc
