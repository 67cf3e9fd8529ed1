#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <string_view>

#include "profmc/block_split.hpp"

namespace profmc {

/*
 * Contrast models. Each model observes X ~ N(0, I_p / n) and maximizes an
 * empirical contrast over upsilon in R^p:
 *
 *   Gaussian:     L = n (X.u - ||u||^2 / 2)                      (exact quadratic)
 *   LatticeBump:  L = n (X.u - ||u||^2 / 2) + n f_lat(u) ||u||^3
 *   KernelBump:   L = n (X.u - ||u||^2 / 2) + n f_ker(u) ||u||^3 / 3
 *
 * f_lat is 1 on a lattice of hyperplanes u_1 = k * spacing intersected with a
 * ball, decaying to 0 across a shell of width vicinity_delta (= 1/n); it
 * breaks root-n consistency of the scalar target u_1 when beta_n = sqrt(p^3/n)
 * stays bounded away from 0. f_ker is 1 outside a target-space hole of radius
 * (1/L) sqrt(p/n) (up to the transition) and inside a radial cutoff at
 * 2 sqrt(p/n); it vanishes identically on the { theta = 0 } subspace, which
 * biases the profile likelihood ratio by order beta_n. All transitions use a
 * C^2 quintic smoothstep, so gradients are exact everywhere.
 */

enum class ModelKind { Gaussian, LatticeBump, KernelBump };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::Gaussian;
  int n = 0;
  BlockSplit split;
  double L = 6.0;                 // kernel hole scale: hole radius (1/L) sqrt(p/n)
  double vicinity_delta = 0.0;    // lattice shell width
  double outer_cutoff_eps = 0.25; // kernel outer cutoff: f = 0 past (2+eps) sqrt(p/n)

  static ModelSpec gaussian(int n, int p_total, int p_target = 0);
  static ModelSpec lattice_bump(int n, int p_total);
  static ModelSpec kernel_bump(int n, int p_total, double L = 6.0, double eps = 0.25);
  void validate() const;
};

// Quintic smoothstep 6t^5 - 15t^4 + 10t^3 clamped to [0,1]: C^2, s(1/2) = 1/2,
// s(t) + s(1-t) = 1.
double smooth_step(double t);
double smooth_step_deriv(double t);

// Lattice geometry. spacing = (1/2) sqrt(beta_n / n) = (1/2) (p/n)^{3/4}.
double lattice_spacing(int n, int p_total);

// Snap x1 to the nearest lattice multiple with |snapped| >= |x1| (round away
// from zero). Returns {snapped, |snapped - x1|}.
struct LatticeSnap {
  double snapped;
  double delta;
};
LatticeSnap snap_to_lattice(double x1, double spacing);

// Copy of X with coordinate 1 snapped away from zero onto the lattice.
Eigen::VectorXd nearest_lattice_point(const Eigen::VectorXd& x, const ModelSpec& spec);

// Bump profiles in [0,1].
double kernel_bump_f(const ModelSpec& spec, const Eigen::VectorXd& u);
double lattice_bump_f(const ModelSpec& spec, const Eigen::VectorXd& u);

// Empirical contrast and its gradient. Inputs must be finite (NonFinite).
double contrast_value(const ModelSpec& spec, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& u);
Eigen::VectorXd contrast_gradient(const ModelSpec& spec, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u);

// Distance from zero to the generalized gradient of the contrast at u.
// Equals the gradient norm wherever the contrast is differentiable. The
// lattice contrast is nonsmooth on the corner set {line distance = ||u|| -
// ball_radius}, and the maximizer can pin there; on that set this is the
// minimum norm over the segment between the two one-sided gradients, the
// first-order residual appropriate for a corner maximizer.
double stationarity_residual(const ModelSpec& spec, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u);

// X ~ N(0, I/n) drawn coordinate-wise from the seeded stream.
Eigen::VectorXd sample_observation(const ModelSpec& spec, std::uint64_t seed);

// Shell where the lattice construction is active: ||X||^3 within
// ((1/2)(p/n)^{3/2}, (2p/n)^{3/2}) and |X_1| <= 1.
bool in_activation_shell(const ModelSpec& spec, const Eigen::VectorXd& x);

// Ball radius of the lattice admissible set: sqrt(2p/n) + spacing.
double lattice_ball_radius(const ModelSpec& spec);

}  // namespace profmc
