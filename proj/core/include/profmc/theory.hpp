#pragma once

/*
 * Non-asymptotic bound calculator.
 *
 * The deviation bounds for the profile estimator are driven by a small set
 * of model constants (identifiability gap, exponential-moment constants,
 * smoothness slope) combined into a "spread" radius. This header exposes:
 *
 *   - entropy_term   z(x, Q; g), the complexity penalty of a Q-dimensional
 *                    unit ball at confidence x under moment range g,
 *   - breve_constants  the transform that converts raw moment constants
 *                    into their efficient-score counterparts,
 *   - spread         the error radius entering both bounds,
 *   - theorem_bounds the Fisher and Wilks right-hand sides,
 *   - beta_n         the critical-dimension scale sqrt(p^3/n),
 *   - check_large_n  the sample-size condition used by the lattice model,
 *   - estimate_r0    Monte Carlo localization radius from maximizer samples.
 *
 * All functions are pure. None of them see the data; they consume dimensions
 * and constants only, except estimate_r0 which consumes a materialized list
 * of fitted maximizers.
 */

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "profmc/block_split.hpp"
#include "profmc/information.hpp"
#include "profmc/model.hpp"

namespace profmc {

// Constants under which the deviation bounds hold. Defaults describe an
// exactly quadratic contrast with standard Gaussian score.
struct ConditionConstants {
  double nu = 0.0;           // cross-information coupling, must stay < 1
  double nu0 = 1.0;          // score exponential-moment constant
  double nu1 = 1.0;          // gradient-increment exponential-moment constant
  double omega = 0.0;        // gradient-increment scale, at most 1/2
  double g = kInfiniteRange; // moment range; +inf selects the direct entropy branch
  double delta_slope = 0.0;  // smoothness slope c in delta(r) = c*r

  // Documentation-only fields; nothing computes with them.
  std::optional<double> b_r;
  std::optional<double> g_r;
  std::optional<double> nu_r;

  static constexpr double kInfiniteRange =
      std::numeric_limits<double>::infinity();

  static ConditionConstants make(double nu, double nu0, double nu1,
                                 double omega, double g, double delta_slope);
  void validate() const;  // throws ConfigInvalid
};

struct BreveConstants {
  double g_breve;
  double nu_breve;
};

// Transform of (g, nu) into the efficient-score scale:
//   g_breve  = sqrt(1-nu^2) / (1 + nu*sqrt(1+nu^2)) * g
//   nu_breve = (1 + nu*sqrt(1+nu^2)) / sqrt(1-nu^2) * nu
// so that g_breve * nu_breve == g * nu exactly.
BreveConstants breve_constants(double g, double nu);

// z(x, Q; g) = sqrt(2(x+Q)) on the direct branch (value <= g), otherwise
// (x+Q)/g + g/2. Continuous at the branch point. Q plays the role of
// 2*p_total + 2*p_target.
double entropy_term(double x, double Q, double g);

// Error radius ( 8/(1-nu^2)^2 * delta_slope*r
//                + 6*nu1*omega*z(x, 2p_total+2p_target; g_breve) ) * r.
double spread(double r, double x, int p_total, int p_target,
              const ConditionConstants& constants);

struct TheoremBounds {
  double fisher_rhs;
  double wilks_rhs;
};

// fisher_rhs = spread(r0, x)
// wilks_rhs  = 8*(xi_norm + spread(r0,x)) * spread(2*(1+nu)*r0, x)
//              + spread(r0,x)^2
TheoremBounds theorem_bounds(double xi_norm, double r0, double x,
                             const BlockSplit& dims,
                             const ConditionConstants& constants);

// sqrt(p^3/n): the scale separating the Fisher-consistent regime from the
// Wilks-consistent one in the counterexample models.
double beta_n(std::int64_t n, int p);

// true iff ((2^(1/3)-1)/2^(1/6)) * sqrt(p/n) >= (1/2)*(p/n)^(3/4),
// the sample-size condition under which the lattice construction below the
// critical dimension keeps its intended geometry.
bool check_large_n(std::int64_t n, int p);

// One replicate's fitted maximizers: unconstrained and constrained-at-truth.
// valid=false marks a replicate whose optimizer failed; a single invalid
// sample forces estimate_r0 to the +infinity sentinel.
struct MaximizerPair {
  Eigen::VectorXd full;
  Eigen::VectorXd constrained;
  bool valid = true;
};

/*
 * Empirical localization radius: the nearest-rank (1 - e^{-x})-quantile of
 *   m_i = max(||Dfull (full_i - center)||, ||Dfull (constrained_i - center)||)
 * with Dfull the matrix square root of blocks.Dfull2. Requires at least
 * ceil(10*e^x) samples (InsufficientSamples otherwise). Permutation
 * invariant and nondecreasing in x.
 */
double estimate_r0(const std::vector<MaximizerPair>& samples,
                   const InformationBlocks& blocks, const JointParameter& center,
                   double x);

// Per-model default constants. The bump models share the Gaussian score, so
// only the smoothness slope and gradient-increment scale differ:
//   Gaussian    omega = 0,          delta_slope = 0
//   LatticeBump omega = 1/sqrt(n),  delta_slope = 1/sqrt(n)
//   KernelBump  omega = 1/sqrt(n),  delta_slope = L_tilde/sqrt(n)
// L_tilde is a user-set order-1 constant, default 1.
ConditionConstants default_constants(const ModelSpec& spec,
                                     double l_tilde = 1.0);

}  // namespace profmc
