#pragma once

#include <Eigen/Core>
#include <optional>

#include "profmc/block_split.hpp"

namespace profmc {

/*
 * Block decomposition of the full information matrix at the true point,
 *
 *     Dfull^2 = [ D^2  A  ]
 *               [ A^T  H^2 ],
 *
 * with D^2 the target block (p_target x p_target), H^2 the nuisance block and
 * A the cross term. The profile estimator sees the Schur complement
 * Dbreve^2 = D^2 - A H^-2 A^T, and the efficient score standardizes the
 * target-direction score by its inverse square root. V^2 is an optional
 * deviation covariance; every model implemented here has V^2 = Dfull^2.
 */
struct InformationBlocks {
  Eigen::MatrixXd D2;      // p_target x p_target
  Eigen::MatrixXd A;       // p_target x p_nuisance
  Eigen::MatrixXd H2;      // p_nuisance x p_nuisance
  Eigen::MatrixXd Dfull2;  // p_total x p_total
  std::optional<Eigen::MatrixXd> V2;

  // scale * identity in every block; the models here have Dfull^2 = n * I.
  static InformationBlocks identity_scaled(double scale, const BlockSplit& split);
};

// Symmetric PSD square root via eigendecomposition. Eigenvalues below
// -1e-10 * max|eig| fail; small negatives inside that band clamp to zero.
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m, const char* what);

// Schur complement D^2 - A H^-2 A^T, symmetrized. Throws
// SingularNuisanceInformation when H^2 has a relative eigenvalue below 1e-12,
// NotPositiveDefinite when the complement has a material negative eigenvalue.
Eigen::MatrixXd dbreve_squared(const InformationBlocks& blocks);

// Efficient score Dbreve^-1 (grad_theta - A H^-2 grad_eta).
Eigen::VectorXd efficient_score(const InformationBlocks& blocks,
                                const Eigen::VectorXd& grad_theta,
                                const Eigen::VectorXd& grad_eta);

// Identifiability angle nu = spectral norm of H^-1 A^T D^-1 (square-root
// factors). Zero cross term gives 0; values below 1 keep Dbreve^2 positive.
double identifiability_nu(const InformationBlocks& blocks);

/*
 * Elliptic vicinity { upsilon : ||Dfull (upsilon - center)|| <= radius }.
 * The metric square root is cached at construction; membership is checked
 * with a 1e-12 slack so boundary points count as inside.
 */
struct LocalSet {
  Eigen::VectorXd center;
  double radius = 0.0;
  Eigen::MatrixXd metric;
  Eigen::MatrixXd metric_sqrt;

  static LocalSet make(Eigen::VectorXd center, double radius, Eigen::MatrixXd metric);
  bool contains(const Eigen::VectorXd& point) const;
};

inline bool local_ball_contains(const LocalSet& set, const Eigen::VectorXd& point) {
  return set.contains(point);
}

}  // namespace profmc
