#include "doctest.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "profmc/errors.hpp"
#include "profmc/information.hpp"
#include "profmc/model.hpp"
#include "profmc/theory.hpp"

using namespace profmc;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ConditionConstants constants_with(double nu, double nu1, double omega, double g,
                                  double delta_slope) {
  return ConditionConstants::make(nu, 1.0, nu1, omega, g, delta_slope);
}

MaximizerPair pair_at(double full_x, double constrained_x) {
  MaximizerPair p;
  p.full = Eigen::Vector2d(full_x, 0.0);
  p.constrained = Eigen::Vector2d(constrained_x, 0.0);
  return p;
}

}  // namespace

TEST_CASE("condition constants validation") {
  CHECK_NOTHROW(ConditionConstants{}.validate());
  CHECK_NOTHROW(constants_with(0.0, 1.0, 0.0, 1.0, 0.0));
  CHECK_NOTHROW(constants_with(0.0, 1.0, 0.5, 1.0, 0.0));  // omega = 1/2 boundary
  CHECK_THROWS_AS(constants_with(0.0, 1.0, 0.51, 1.0, 0.0), ConfigInvalid);
  CHECK_THROWS_AS(constants_with(1.0, 1.0, 0.1, 1.0, 0.0), ConfigInvalid);
  CHECK_THROWS_AS(constants_with(-0.1, 1.0, 0.1, 1.0, 0.0), ConfigInvalid);
  CHECK_THROWS_AS(constants_with(0.0, -1.0, 0.1, 1.0, 0.0), ConfigInvalid);
  CHECK_THROWS_AS(constants_with(0.0, 1.0, 0.1, 0.0, 0.0), ConfigInvalid);
  CHECK_THROWS_AS(constants_with(0.0, 1.0, 0.1, 1.0, -0.2), ConfigInvalid);
}

TEST_CASE("per-model default constants") {
  const auto g = default_constants(ModelSpec::gaussian(256, 4));
  CHECK(g.omega == 0.0);
  CHECK(g.delta_slope == 0.0);
  CHECK(g.nu == 0.0);
  CHECK(g.nu0 == 1.0);
  CHECK(g.nu1 == 1.0);
  CHECK(g.g == kInf);

  const auto lat = default_constants(ModelSpec::lattice_bump(256, 4));
  CHECK(lat.omega == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(lat.delta_slope == doctest::Approx(0.0625).epsilon(1e-15));

  const auto ker = default_constants(ModelSpec::kernel_bump(256, 4), 2.5);
  CHECK(ker.omega == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(ker.delta_slope == doctest::Approx(2.5 / 16.0).epsilon(1e-15));
  CHECK_THROWS_AS(default_constants(ModelSpec::kernel_bump(256, 4), 0.0),
                  ConfigInvalid);
}

TEST_CASE("entropy term") {
  CHECK(entropy_term(2.0, 6.0, 10.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(entropy_term(2.0, 6.0, 1.0) == doctest::Approx(8.5).epsilon(1e-15));
  CHECK(entropy_term(0.0, 0.0, 3.0) == 0.0);
  CHECK(entropy_term(2.0, 6.0, kInf) == doctest::Approx(4.0).epsilon(1e-15));

  // Continuity at the branch point g = sqrt(2(x+Q)).
  const double x = 1.3, q = 7.2;
  const double b = std::sqrt(2.0 * (x + q));
  CHECK(entropy_term(x, q, b) == doctest::Approx(b).epsilon(1e-15));
  CHECK(entropy_term(x, q, b * (1.0 + 1e-9)) ==
        doctest::Approx(entropy_term(x, q, b * (1.0 - 1e-9))).epsilon(1e-8));

  // Monotone: nonincreasing in g, nondecreasing in x and Q.
  double prev = kInf;
  for (double g = 0.5; g < 12.0; g += 0.5) {
    const double z = entropy_term(x, q, g);
    CHECK(z <= prev + 1e-15);
    prev = z;
  }
  CHECK(entropy_term(2.0, 6.0, 1.0) > entropy_term(1.0, 6.0, 1.0));
  CHECK(entropy_term(2.0, 8.0, 1.0) > entropy_term(2.0, 6.0, 1.0));

  CHECK_THROWS_AS(entropy_term(-0.1, 6.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(entropy_term(2.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(entropy_term(2.0, 6.0, 0.0), std::invalid_argument);
}

TEST_CASE("efficient-score constant transform") {
  const auto id = breve_constants(2.0, 0.0);
  CHECK(id.g_breve == 2.0);
  CHECK(id.nu_breve == 0.0);

  const auto b = breve_constants(1.0, 0.6);
  CHECK(b.g_breve == doctest::Approx(0.47066735520151093).epsilon(1e-12));
  CHECK(b.nu_breve == doctest::Approx(1.2747856705360767).epsilon(1e-12));

  for (double nu : {0.1, 0.3, 0.6, 0.9})
    for (double g : {0.5, 1.0, 2.0}) {
      const auto bc = breve_constants(g, nu);
      CHECK(bc.g_breve * bc.nu_breve == doctest::Approx(g * nu).epsilon(1e-12));
      CHECK(bc.g_breve < g);
      CHECK(bc.nu_breve > nu);
    }

  CHECK_THROWS_AS(breve_constants(0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(breve_constants(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("spread radius") {
  const auto stochastic_only = constants_with(0.0, 1.0, 0.1, 10.0, 0.0);
  CHECK(spread(2.0, 2.0, 2, 1, stochastic_only) ==
        doctest::Approx(4.8).epsilon(1e-12));

  const auto smooth_only = constants_with(0.0, 1.0, 0.0, 10.0, 0.01);
  CHECK(spread(1.0, 2.0, 2, 1, smooth_only) == doctest::Approx(0.08).epsilon(1e-12));

  CHECK(spread(0.0, 2.0, 2, 1, stochastic_only) == 0.0);
  // Zero-coefficient constants stay exactly zero even at the +inf sentinel.
  const auto quadratic = ConditionConstants{};
  CHECK(spread(kInf, 2.0, 2, 1, quadratic) == 0.0);

  // Hand recomputation with a nonzero coupling.
  const auto coupled = constants_with(0.5, 2.0, 0.2, 5.0, 0.1);
  const double factor = (1.0 + 0.5 * std::sqrt(1.25)) / std::sqrt(0.75);
  const double g_breve = 5.0 / factor;
  const double q = 2.0 * 3 + 2.0 * 1;
  const double direct = std::sqrt(2.0 * (1.0 + q));
  const double z = direct <= g_breve ? direct : (1.0 + q) / g_breve + g_breve / 2.0;
  const double expect =
      (8.0 / (0.75 * 0.75) * 0.1 * 1.5 + 6.0 * 2.0 * 0.2 * z) * 1.5;
  CHECK(spread(1.5, 1.0, 3, 1, coupled) == doctest::Approx(expect).epsilon(1e-12));

  // Monotone in r, x, delta_slope, omega, nu1.
  double prev = 0.0;
  for (double r = 0.0; r <= 3.0; r += 0.25) {
    const double s = spread(r, 1.0, 3, 1, coupled);
    CHECK(s >= prev);
    prev = s;
  }
  CHECK(spread(1.0, 2.0, 3, 1, coupled) >= spread(1.0, 1.0, 3, 1, coupled));
  CHECK(spread(1.0, 1.0, 3, 1, constants_with(0.5, 2.0, 0.2, 5.0, 0.2)) >
        spread(1.0, 1.0, 3, 1, coupled));
  CHECK(spread(1.0, 1.0, 3, 1, constants_with(0.5, 2.0, 0.3, 5.0, 0.1)) >
        spread(1.0, 1.0, 3, 1, coupled));
  CHECK(spread(1.0, 1.0, 3, 1, constants_with(0.5, 3.0, 0.2, 5.0, 0.1)) >
        spread(1.0, 1.0, 3, 1, coupled));

  CHECK_THROWS_AS(spread(-1.0, 1.0, 3, 1, coupled), std::invalid_argument);
  CHECK_THROWS_AS(spread(1.0, -1.0, 3, 1, coupled), std::invalid_argument);
}

TEST_CASE("deviation bound right-hand sides") {
  const auto dims = BlockSplit::make(2, 1);
  const auto constants = constants_with(0.0, 1.0, 1.0 / 240.0, 10.0, 0.0);
  const auto bounds = theorem_bounds(2.0, 1.0, 2.0, dims, constants);
  CHECK(bounds.fisher_rhs == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(bounds.wilks_rhs == doctest::Approx(3.37).epsilon(1e-12));

  const auto zero = theorem_bounds(2.0, 0.0, 2.0, dims, constants);
  CHECK(zero.fisher_rhs == 0.0);
  CHECK(zero.wilks_rhs == 0.0);

  // Monotone in r0 and xi_norm; wilks bound dominates the squared fisher bound.
  double prev_f = 0.0, prev_w = 0.0;
  for (double r0 = 0.0; r0 <= 2.0; r0 += 0.2) {
    const auto b = theorem_bounds(2.0, r0, 2.0, dims, constants);
    CHECK(b.fisher_rhs >= prev_f);
    CHECK(b.wilks_rhs >= prev_w);
    CHECK(b.wilks_rhs >= b.fisher_rhs * b.fisher_rhs - 1e-15);
    prev_f = b.fisher_rhs;
    prev_w = b.wilks_rhs;
  }
  CHECK(theorem_bounds(3.0, 1.0, 2.0, dims, constants).wilks_rhs >
        theorem_bounds(2.0, 1.0, 2.0, dims, constants).wilks_rhs);
  CHECK_THROWS_AS(theorem_bounds(-1.0, 1.0, 2.0, dims, constants),
                  std::invalid_argument);
}

TEST_CASE("critical dimension scale") {
  CHECK(beta_n(1000, 10) == 1.0);
  CHECK(beta_n(10000, 10) == doctest::Approx(0.31622776601683794).epsilon(1e-15));
  CHECK(beta_n(1024, 4) / beta_n(1024, 2) ==
        doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-14));
  CHECK_THROWS_AS(beta_n(0, 4), std::invalid_argument);
  CHECK_THROWS_AS(beta_n(100, 0), std::invalid_argument);
}

TEST_CASE("sample size condition") {
  CHECK(check_large_n(10000, 1));
  CHECK_FALSE(check_large_n(16, 16));

  // Equivalent form: p/n <= (2 c*)^4 with c* = (2^(1/3)-1)/2^(1/6).
  const double c_star = (std::cbrt(2.0) - 1.0) / std::pow(2.0, 1.0 / 6.0);
  CHECK(c_star == doctest::Approx(0.2315633301690337).epsilon(1e-14));
  const double threshold = std::pow(2.0 * c_star, 4.0);
  const std::vector<std::pair<std::int64_t, int>> grid = {
      {100000, 3}, {4096, 16}, {4096, 200}, {64, 2}, {64, 16}, {50, 3}, {10, 9}};
  for (const auto& [n, p] : grid) {
    const double ratio = static_cast<double>(p) / static_cast<double>(n);
    if (std::abs(ratio - threshold) < 1e-6) continue;  // skip knife-edge
    CHECK(check_large_n(n, p) == (ratio < threshold));
  }
}

TEST_CASE("localization radius estimator") {
  const auto split = BlockSplit::make(2, 1);
  const auto blocks = InformationBlocks::identity_scaled(4.0, split);
  const JointParameter center{Eigen::Vector2d(0.0, 0.0)};

  SUBCASE("degenerate all-at-center sample") {
    std::vector<MaximizerPair> samples(50, pair_at(0.0, 0.0));
    CHECK(estimate_r0(samples, blocks, center, 1.0) == 0.0);
  }

  SUBCASE("exact nearest-rank quantile") {
    std::vector<MaximizerPair> samples;
    for (int i = 1; i <= 250; ++i)
      samples.push_back(pair_at(static_cast<double>(i) / 250.0, 0.0));
    // level = 1 - e^{-3}, rank = ceil(0.95021... * 250) = 238, m = 2*238/250.
    CHECK(estimate_r0(samples, blocks, center, 3.0) ==
          doctest::Approx(1.904).epsilon(1e-12));

    // Permutation invariance.
    std::reverse(samples.begin(), samples.end());
    CHECK(estimate_r0(samples, blocks, center, 3.0) ==
          doctest::Approx(1.904).epsilon(1e-12));

    // Nondecreasing in x; at x = 0 the rank clamps to the minimum.
    CHECK(estimate_r0(samples, blocks, center, 0.0) ==
          doctest::Approx(2.0 / 250.0).epsilon(1e-12));
    double prev = 0.0;
    for (double x : {0.5, 1.0, 2.0, 3.0}) {
      const double r = estimate_r0(samples, blocks, center, x);
      CHECK(r >= prev);
      prev = r;
    }
  }

  SUBCASE("constrained arm participates via the max") {
    std::vector<MaximizerPair> samples(20, pair_at(0.0, 0.25));
    CHECK(estimate_r0(samples, blocks, center, 0.0) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("failure sentinels") {
    std::vector<MaximizerPair> samples(201, pair_at(0.1, 0.0));
    samples[77].valid = false;
    CHECK(estimate_r0(samples, blocks, center, 3.0) == kInf);

    std::vector<MaximizerPair> short_list(200, pair_at(0.1, 0.0));
    CHECK_THROWS_AS(estimate_r0(short_list, blocks, center, 3.0),
                    InsufficientSamples);
    CHECK_THROWS_AS(estimate_r0(short_list, blocks, center, -0.5),
                    std::invalid_argument);
  }
}

