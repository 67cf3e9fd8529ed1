#include "profmc/information.hpp"

#include <Eigen/Dense>

#include "profmc/errors.hpp"

namespace profmc {

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym_eigen(const Eigen::MatrixXd& m,
                                                         const char* what) {
  Eigen::MatrixXd s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success)
    throw NotPositiveDefinite(std::string(what) + ": eigendecomposition failed");
  return es;
}

// Inverse of a symmetric positive definite matrix, rejecting relative
// eigenvalues below 1e-12 as singular.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() == 0) return m;
  auto es = sym_eigen(m, what);
  const double max_eig = es.eigenvalues().cwiseAbs().maxCoeff();
  const double floor = 1e-12 * max_eig;
  Eigen::VectorXd inv = es.eigenvalues();
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    if (inv[i] <= floor)
      throw SingularNuisanceInformation(std::string(what) + ": eigenvalue " +
                                        std::to_string(es.eigenvalues()[i]) +
                                        " below relative floor");
    inv[i] = 1.0 / inv[i];
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd spd_inverse_sqrt(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() == 0) return m;
  auto es = sym_eigen(m, what);
  const double max_eig = es.eigenvalues().cwiseAbs().maxCoeff();
  const double floor = 1e-12 * max_eig;
  Eigen::VectorXd inv = es.eigenvalues();
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    if (inv[i] <= floor)
      throw NotPositiveDefinite(std::string(what) + ": eigenvalue " +
                                std::to_string(es.eigenvalues()[i]) +
                                " not positive");
    inv[i] = 1.0 / std::sqrt(inv[i]);
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

InformationBlocks InformationBlocks::identity_scaled(double scale, const BlockSplit& split) {
  InformationBlocks b;
  b.D2 = scale * Eigen::MatrixXd::Identity(split.p_target, split.p_target);
  b.A = Eigen::MatrixXd::Zero(split.p_target, split.p_nuisance);
  b.H2 = scale * Eigen::MatrixXd::Identity(split.p_nuisance, split.p_nuisance);
  b.Dfull2 = scale * Eigen::MatrixXd::Identity(split.p_total, split.p_total);
  b.V2 = b.Dfull2;
  return b;
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() == 0) return m;
  auto es = sym_eigen(m, what);
  const double max_eig = es.eigenvalues().cwiseAbs().maxCoeff();
  Eigen::VectorXd root = es.eigenvalues();
  for (Eigen::Index i = 0; i < root.size(); ++i) {
    if (root[i] < -1e-10 * max_eig)
      throw NotPositiveDefinite(std::string(what) + ": eigenvalue " +
                                std::to_string(root[i]) + " is negative");
    root[i] = std::sqrt(std::max(root[i], 0.0));
  }
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd dbreve_squared(const InformationBlocks& blocks) {
  if (blocks.H2.rows() == 0)
    return 0.5 * (blocks.D2 + blocks.D2.transpose());
  const Eigen::MatrixXd h_inv = spd_inverse(blocks.H2, "dbreve_squared: H^2");
  Eigen::MatrixXd schur = blocks.D2 - blocks.A * h_inv * blocks.A.transpose();
  schur = 0.5 * (schur + schur.transpose());

  auto es = sym_eigen(schur, "dbreve_squared");
  const double d2_scale = sym_eigen(blocks.D2, "dbreve_squared: D^2")
                              .eigenvalues()
                              .cwiseAbs()
                              .maxCoeff();
  if (es.eigenvalues().minCoeff() < -1e-10 * d2_scale)
    throw NotPositiveDefinite("dbreve_squared: Schur complement has eigenvalue " +
                              std::to_string(es.eigenvalues().minCoeff()));
  return schur;
}

Eigen::VectorXd efficient_score(const InformationBlocks& blocks,
                                const Eigen::VectorXd& grad_theta,
                                const Eigen::VectorXd& grad_eta) {
  const Eigen::MatrixXd schur = dbreve_squared(blocks);
  Eigen::VectorXd corrected = grad_theta;
  if (blocks.H2.rows() > 0) {
    const Eigen::MatrixXd h_inv = spd_inverse(blocks.H2, "efficient_score: H^2");
    corrected -= blocks.A * (h_inv * grad_eta);
  }
  return spd_inverse_sqrt(schur, "efficient_score: Dbreve^2") * corrected;
}

double identifiability_nu(const InformationBlocks& blocks) {
  if (blocks.H2.rows() == 0 || blocks.A.size() == 0) return 0.0;
  if (blocks.A.isZero(0.0)) return 0.0;
  const Eigen::MatrixXd m = spd_inverse_sqrt(blocks.H2, "identifiability_nu: H^2") *
                            blocks.A.transpose() *
                            spd_inverse_sqrt(blocks.D2, "identifiability_nu: D^2");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().size() == 0 ? 0.0 : svd.singularValues()[0];
}

LocalSet LocalSet::make(Eigen::VectorXd center, double radius, Eigen::MatrixXd metric) {
  if (!(radius >= 0.0)) throw ConfigInvalid("LocalSet: radius must be >= 0");
  if (metric.rows() != metric.cols() || metric.rows() != center.size())
    throw ConfigInvalid("LocalSet: metric must be square and match the center");
  LocalSet set;
  set.metric_sqrt = matrix_sqrt_psd(metric, "LocalSet metric");
  set.center = std::move(center);
  set.radius = radius;
  set.metric = std::move(metric);
  return set;
}

bool LocalSet::contains(const Eigen::VectorXd& point) const {
  return (metric_sqrt * (point - center)).norm() <= radius + 1e-12;
}

}  // namespace profmc
