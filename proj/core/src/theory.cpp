#include "profmc/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "profmc/errors.hpp"

namespace profmc {

ConditionConstants ConditionConstants::make(double nu, double nu0, double nu1,
                                            double omega, double g,
                                            double delta_slope) {
  ConditionConstants c;
  c.nu = nu;
  c.nu0 = nu0;
  c.nu1 = nu1;
  c.omega = omega;
  c.g = g;
  c.delta_slope = delta_slope;
  c.validate();
  return c;
}

void ConditionConstants::validate() const {
  if (!(nu >= 0.0 && nu < 1.0))
    throw ConfigInvalid("constants: nu must lie in [0, 1)");
  if (!(nu0 > 0.0)) throw ConfigInvalid("constants: nu0 must be positive");
  if (!(nu1 > 0.0)) throw ConfigInvalid("constants: nu1 must be positive");
  if (!(omega >= 0.0 && omega <= 0.5))
    throw ConfigInvalid("constants: omega must lie in [0, 1/2]");
  if (!(g > 0.0)) throw ConfigInvalid("constants: g must be positive");
  if (!(delta_slope >= 0.0))
    throw ConfigInvalid("constants: delta_slope must be nonnegative");
}

BreveConstants breve_constants(double g, double nu) {
  if (!(g > 0.0)) throw std::invalid_argument("breve_constants: g must be positive");
  if (!(nu >= 0.0 && nu < 1.0))
    throw std::invalid_argument("breve_constants: nu must lie in [0, 1)");
  const double factor = (1.0 + nu * std::sqrt(1.0 + nu * nu)) /
                        std::sqrt(1.0 - nu * nu);
  return {g / factor, nu * factor};
}

double entropy_term(double x, double Q, double g) {
  if (!(x >= 0.0)) throw std::invalid_argument("entropy_term: x must be >= 0");
  if (!(Q >= 0.0)) throw std::invalid_argument("entropy_term: Q must be >= 0");
  if (!(g > 0.0)) throw std::invalid_argument("entropy_term: g must be positive");
  const double direct = std::sqrt(2.0 * (x + Q));
  if (direct <= g) return direct;
  return (x + Q) / g + 0.5 * g;
}

double spread(double r, double x, int p_total, int p_target,
              const ConditionConstants& constants) {
  constants.validate();
  if (!(r >= 0.0)) throw std::invalid_argument("spread: r must be >= 0");
  if (!(x >= 0.0)) throw std::invalid_argument("spread: x must be >= 0");
  const double one_minus = 1.0 - constants.nu * constants.nu;
  const double g_breve = breve_constants(constants.g, constants.nu).g_breve;
  const double q = 2.0 * p_total + 2.0 * p_target;
  const double z = entropy_term(x, q, g_breve);
  const double stochastic = 6.0 * constants.nu1 * constants.omega * z;
  const double smooth_coeff = 8.0 / (one_minus * one_minus) * constants.delta_slope;
  // Zero coefficients short-circuit so the r0 = +inf sentinel stays exact
  // instead of producing 0 * inf.
  if (r == 0.0 || (stochastic == 0.0 && smooth_coeff == 0.0)) return 0.0;
  double slope = stochastic;
  if (smooth_coeff != 0.0) slope += smooth_coeff * r;
  return slope * r;
}

TheoremBounds theorem_bounds(double xi_norm, double r0, double x,
                             const BlockSplit& dims,
                             const ConditionConstants& constants) {
  if (!(xi_norm >= 0.0))
    throw std::invalid_argument("theorem_bounds: xi_norm must be >= 0");
  const double s0 = spread(r0, x, dims.p_total, dims.p_target, constants);
  const double s_wide =
      spread(2.0 * (1.0 + constants.nu) * r0, x, dims.p_total, dims.p_target,
             constants);
  return {s0, 8.0 * (xi_norm + s0) * s_wide + s0 * s0};
}

double beta_n(std::int64_t n, int p) {
  if (n < 1 || p < 1) throw std::invalid_argument("beta_n: need n, p >= 1");
  const double pd = static_cast<double>(p);
  return std::sqrt(pd * pd * pd / static_cast<double>(n));
}

bool check_large_n(std::int64_t n, int p) {
  // (2^{1/3} - 1) / 2^{1/6}
  static const double kSlack =
      (std::cbrt(2.0) - 1.0) / std::pow(2.0, 1.0 / 6.0);
  const double ratio = static_cast<double>(p) / static_cast<double>(n);
  return kSlack * std::sqrt(ratio) >= 0.5 * std::pow(ratio, 0.75);
}

double estimate_r0(const std::vector<MaximizerPair>& samples,
                   const InformationBlocks& blocks, const JointParameter& center,
                   double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("estimate_r0: x must be >= 0");
  const double required = std::ceil(10.0 * std::exp(x));
  if (static_cast<double>(samples.size()) < required)
    throw InsufficientSamples(
        "estimate_r0: need at least ceil(10*e^x) = " + std::to_string(required) +
        " samples, got " + std::to_string(samples.size()));

  for (const auto& s : samples)
    if (!s.valid) return std::numeric_limits<double>::infinity();

  const Eigen::MatrixXd dfull = matrix_sqrt_psd(blocks.Dfull2, "Dfull2");
  std::vector<double> m;
  m.reserve(samples.size());
  for (const auto& s : samples) {
    const double a = (dfull * (s.full - center.values)).norm();
    const double b = (dfull * (s.constrained - center.values)).norm();
    const double mi = std::max(a, b);
    if (!std::isfinite(mi)) throw NonFinite("estimate_r0: non-finite sample");
    m.push_back(mi);
  }
  std::sort(m.begin(), m.end());

  const double level = -std::expm1(-x);  // 1 - e^{-x}, accurate for small x
  auto idx = static_cast<std::size_t>(
      std::ceil(level * static_cast<double>(m.size())));
  if (idx < 1) idx = 1;
  if (idx > m.size())
    throw InsufficientSamples("estimate_r0: quantile rank exceeds sample count");
  return m[idx - 1];
}

ConditionConstants default_constants(const ModelSpec& spec, double l_tilde) {
  spec.validate();
  if (!(l_tilde > 0.0))
    throw ConfigInvalid("default_constants: l_tilde must be positive");
  ConditionConstants c;  // nu = 0, nu0 = nu1 = 1, g = +inf
  const double root_n = std::sqrt(static_cast<double>(spec.n));
  switch (spec.kind) {
    case ModelKind::Gaussian:
      break;
    case ModelKind::LatticeBump:
      c.omega = 1.0 / root_n;
      c.delta_slope = 1.0 / root_n;
      break;
    case ModelKind::KernelBump:
      c.omega = 1.0 / root_n;
      c.delta_slope = l_tilde / root_n;
      break;
  }
  c.validate();
  return c;
}

}  // namespace profmc
