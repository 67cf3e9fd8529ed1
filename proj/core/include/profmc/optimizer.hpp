#pragma once

#include <Eigen/Core>
#include <string>

#include "profmc/model.hpp"

namespace profmc {

/*
 * Profile maximization. The full maximizer upsilon_tilde and the constrained
 * maximizer at a fixed target block feed the two statistics of interest:
 *
 *   fisher side:  theta_tilde = leading block of upsilon_tilde
 *   wilks side:   excess = L(upsilon_tilde) - max_{eta} L(theta*, eta)
 *
 * Strategies per model:
 *  - Gaussian: closed forms (the contrast is exactly quadratic).
 *  - KernelBump: candidate starts {X, lambda_max(||X||) X} refined by
 *    gradient ascent with Armijo backtracking; on the f = 1 plateau the
 *    radial candidate is the exact global maximizer.
 *  - LatticeBump: the bump walls have width 1/n, which stalls joint ascent
 *    (the accepted step collapses to the wall scale). Instead each candidate
 *    lattice slice { u_1 = ell } is maximized exactly: the nuisance
 *    subproblem is rotationally symmetric around the observed nuisance
 *    block, so it reduces to a 1-D radial problem solved by a two-scale grid
 *    plus golden-section refinement. Slices within six spacings of X_1, the
 *    zero slice, and the unsnapped X_1 slice are scanned; the quadratic loss
 *    past six spacings provably exceeds any bump bonus.
 *
 * grad_norm reports the gradient projected onto the subspace the method
 * searched (everything for joint ascent, the nuisance block for slice
 * solves, zero for closed forms).
 */

struct AscentOptions {
  double armijo = 1e-4;          // sufficient-increase fraction
  double shrink = 0.5;           // backtracking factor
  int max_iterations = 500;
  double tol_scale = 1e-6;       // stop when ||grad|| <= tol_scale * n
  double init_step_scale = 1.0;  // first trial step = init_step_scale / n
};

// Positive root of 1 - lambda + a lambda^2 closest to 1 (the radial
// stationary point of the fully engaged cubic model), in the stable form
// 2 / (1 + sqrt(1-4a)). Throws NoLocalMaximizer for a >= 1/4.
double lambda_max(double a);

// tau(a) = (lambda_max(a) - 1)/a extended continuously by tau(0) = 1:
// 4 / (1 + sqrt(1-4a))^2.
double tau_factor(double a);

struct MaximizeOutcome {
  Eigen::VectorXd point;
  double value = 0.0;
  std::string method;
  bool converged = false;
  bool in_s_event = false;  // kernel: radial candidate sits on f = 1 and attains the max
  double grad_norm = 0.0;
};

struct AscentResult {
  Eigen::VectorXd point;
  double value = 0.0;
  bool converged = false;
  double grad_norm = 0.0;
  int iterations = 0;
};

// Plain ascent with Armijo backtracking; the leading freeze_head coordinates
// are held fixed (0 = unconstrained).
AscentResult gradient_ascent(const ModelSpec& spec, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& init, int freeze_head,
                             const AscentOptions& opts = {});

// Exact 1-D maximization of the lattice contrast over the slice u_1 = ell.
MaximizeOutcome maximize_lattice_slice(const ModelSpec& spec, const Eigen::VectorXd& x,
                                       double ell, const AscentOptions& opts = {});

MaximizeOutcome maximize_full(const ModelSpec& spec, const Eigen::VectorXd& x,
                              const AscentOptions& opts = {});

MaximizeOutcome maximize_constrained(const ModelSpec& spec, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& theta_fixed,
                                     const AscentOptions& opts = {});

struct ProfileResult {
  JointParameter upsilon_full;
  JointParameter upsilon_constrained;
  Eigen::VectorXd theta_hat;
  double value_full = 0.0;
  double value_constrained = 0.0;
  double excess = 0.0;
  std::string method;
  bool converged = false;
  bool in_s_event = false;
  double grad_norm_at_solution = 0.0;
};

// Full + constrained-at-zero maximization. The constrained point also enters
// the full comparison (it is full-feasible), so excess >= 0 structurally.
ProfileResult profile_result(const ModelSpec& spec, const Eigen::VectorXd& x,
                             const AscentOptions& opts = {});

}  // namespace profmc
