#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "profmc/errors.hpp"
#include "profmc/model.hpp"
#include "profmc/rng.hpp"

using namespace profmc;

namespace {

Eigen::VectorXd finite_difference_gradient(const ModelSpec& spec,
                                           const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& u) {
  const double h = 1e-6 * (1.0 + u.norm());
  Eigen::VectorXd grad(u.size());
  Eigen::VectorXd probe = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    probe[i] = u[i] + h;
    const double up = contrast_value(spec, x, probe);
    probe[i] = u[i] - h;
    const double down = contrast_value(spec, x, probe);
    probe[i] = u[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

void check_gradient_at(const ModelSpec& spec, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& u) {
  const Eigen::VectorXd analytic = contrast_gradient(spec, x, u);
  const Eigen::VectorXd numeric = finite_difference_gradient(spec, x, u);
  const double scale = std::max(analytic.norm(), 1e-8);
  CHECK((analytic - numeric).norm() / scale <= 1e-5);
}

}  // namespace

TEST_CASE("model kind names round trip") {
  for (auto kind : {ModelKind::Gaussian, ModelKind::LatticeBump, ModelKind::KernelBump})
    CHECK(model_kind_from_string(to_string(kind)) == kind);
  CHECK(std::string(to_string(ModelKind::LatticeBump)) == "lattice-bump");
  CHECK_THROWS_AS(model_kind_from_string("logistic"), ConfigInvalid);
}

TEST_CASE("model factories enforce their invariants") {
  const auto g = ModelSpec::gaussian(100, 6);
  CHECK(g.split.p_target == 3);
  CHECK(ModelSpec::gaussian(100, 6, 2).split.p_target == 2);

  const auto lat = ModelSpec::lattice_bump(64, 2);
  CHECK(lat.split.p_target == 1);
  CHECK(lat.vicinity_delta == doctest::Approx(1.0 / 64).epsilon(1e-15));

  const auto ker = ModelSpec::kernel_bump(256, 8);
  CHECK(ker.split.p_target == 4);
  CHECK(ker.L == 6.0);
  CHECK(ker.outer_cutoff_eps == 0.25);
  CHECK_THROWS_AS(ModelSpec::kernel_bump(256, 7), ConfigInvalid);
  CHECK_THROWS_AS(ModelSpec::kernel_bump(256, 8, -1.0), ConfigInvalid);
  CHECK_THROWS_AS(ModelSpec::gaussian(0, 4), ConfigInvalid);

  ModelSpec broken = lat;
  broken.vicinity_delta = 0.0;
  CHECK_THROWS_AS(broken.validate(), ConfigInvalid);
}

TEST_CASE("quintic smoothstep dyadic values") {
  CHECK(smooth_step(0.5) == 0.5);
  CHECK(smooth_step(0.25) == 0.103515625);
  CHECK(smooth_step(0.0) == 0.0);
  CHECK(smooth_step(-3.0) == 0.0);
  CHECK(smooth_step(1.0) == 1.0);
  CHECK(smooth_step(7.0) == 1.0);
  for (double t : {0.1, 0.3, 0.42, 0.77, 0.95})
    CHECK(smooth_step(t) + smooth_step(1.0 - t) == doctest::Approx(1.0).epsilon(1e-14));

  CHECK(smooth_step_deriv(0.5) == 1.875);
  CHECK(smooth_step_deriv(0.0) == 0.0);
  CHECK(smooth_step_deriv(1.0) == 0.0);
  CHECK(smooth_step_deriv(-1.0) == 0.0);
  for (double t : {0.15, 0.5, 0.85}) {
    const double h = 1e-7;
    const double fd = (smooth_step(t + h) - smooth_step(t - h)) / (2.0 * h);
    CHECK(smooth_step_deriv(t) == doctest::Approx(fd).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("lattice spacing and ball radius") {
  CHECK(lattice_spacing(16, 4) == doctest::Approx(0.17677669529663687).epsilon(1e-15));
  CHECK(lattice_spacing(64, 4) == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(lattice_spacing(256, 8) > lattice_spacing(1024, 8));
  CHECK(lattice_spacing(256, 8) < lattice_spacing(256, 16));

  ModelSpec spec = ModelSpec::lattice_bump(64, 4);
  CHECK(lattice_ball_radius(spec) ==
        doctest::Approx(std::sqrt(8.0 / 64.0) + 0.0625).epsilon(1e-15));
}

TEST_CASE("lattice snapping rounds away from zero") {
  auto snap = snap_to_lattice(0.30, 0.05);
  CHECK(snap.snapped == doctest::Approx(0.30).epsilon(1e-12));
  CHECK(snap.delta == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  snap = snap_to_lattice(0.32, 0.05);
  CHECK(snap.snapped == doctest::Approx(0.35).epsilon(1e-12));
  CHECK(snap.delta == doctest::Approx(0.03).epsilon(1e-9));

  snap = snap_to_lattice(-0.32, 0.05);
  CHECK(snap.snapped == doctest::Approx(-0.35).epsilon(1e-12));
  CHECK(snap.delta == doctest::Approx(0.03).epsilon(1e-9));

  snap = snap_to_lattice(0.30, 0.25);
  CHECK(snap.snapped == doctest::Approx(0.50).epsilon(1e-15));
  CHECK(snap.delta == doctest::Approx(0.20).epsilon(1e-12));

  snap = snap_to_lattice(0.0, 0.25);
  CHECK(snap.snapped == 0.0);
  CHECK(snap.delta == 0.0);

  CHECK_THROWS_AS(snap_to_lattice(0.3, 0.0), ConfigInvalid);

  ModelSpec spec = ModelSpec::lattice_bump(64, 2);
  Eigen::Vector2d x(0.05, 0.12);
  const Eigen::VectorXd snapped = nearest_lattice_point(x, spec);
  const double s = lattice_spacing(64, 2);
  CHECK(snapped[0] == doctest::Approx(2.0 * s).epsilon(1e-12));
  CHECK(snapped[1] == 0.12);
  CHECK(std::abs(snapped[0]) >= std::abs(x[0]));
}

TEST_CASE("lattice bump profile") {
  ModelSpec spec = ModelSpec::lattice_bump(64, 2);
  const double s = lattice_spacing(64, 2);
  const double delta = spec.vicinity_delta;

  Eigen::Vector2d on_plane(s, 0.1);
  CHECK(lattice_bump_f(spec, on_plane) == 1.0);

  Eigen::Vector2d mid(s + delta / 2.0, 0.1);
  CHECK(lattice_bump_f(spec, mid) == doctest::Approx(0.5).epsilon(1e-12));

  Eigen::Vector2d off(s + delta, 0.1);
  CHECK(lattice_bump_f(spec, off) == 0.0);
  Eigen::Vector2d between(s / 2.0, 0.0);  // half a spacing from any plane
  CHECK(lattice_bump_f(spec, between) == 0.0);

  // On a plane but past the admissible ball: the ball excess binds.
  Eigen::Vector2d far(0.0, lattice_ball_radius(spec) + 2.0 * delta);
  CHECK(lattice_bump_f(spec, far) == 0.0);
}

TEST_CASE("kernel bump profile") {
  ModelSpec spec = ModelSpec::kernel_bump(256, 8);
  const double root = std::sqrt(8.0 / 256.0);
  const auto unit = [](int i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(8);
    e[i] = 1.0;
    return e;
  };

  CHECK(kernel_bump_f(spec, Eigen::VectorXd::Zero(8)) == 0.0);
  // The profile vanishes identically when the target block is zero.
  CHECK(kernel_bump_f(spec, 0.1 * unit(5)) == 0.0);
  // Inside the target hole.
  CHECK(kernel_bump_f(spec, (0.8 * root / spec.L) * unit(0)) == 0.0);
  // Plateau: past the ring transition, inside the radial cutoff.
  CHECK(kernel_bump_f(spec, 0.15 * unit(0)) == 1.0);
  // Mid ring transition at 1.5 (root/L).
  CHECK(kernel_bump_f(spec, (1.5 * root / spec.L) * unit(1)) ==
        doctest::Approx(0.5).epsilon(1e-12));
  // Past the outer cutoff.
  CHECK(kernel_bump_f(spec, 0.5 * unit(0)) == 0.0);

  // Invariant under rotations within the target and nuisance blocks.
  Eigen::VectorXd a = 0.1 * unit(0) + 0.05 * unit(4);
  Eigen::VectorXd b = 0.1 * unit(2) + 0.05 * unit(6);
  CHECK(kernel_bump_f(spec, a) == doctest::Approx(kernel_bump_f(spec, b)).epsilon(1e-12));

  SplitMix64 rng(3);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd u(8);
    for (int j = 0; j < 8; ++j) u[j] = (rng.next_unit() - 0.5) * 0.9;
    const double f = kernel_bump_f(spec, u);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }
}

TEST_CASE("contrast closed forms") {
  const ModelSpec g = ModelSpec::gaussian(64, 3);
  Eigen::Vector3d x(0.2, -0.1, 0.05);
  CHECK(contrast_value(g, x, x) ==
        doctest::Approx(64.0 * x.squaredNorm() / 2.0).epsilon(1e-14));
  CHECK(contrast_value(g, x, Eigen::Vector3d::Zero()) == 0.0);

  const ModelSpec ker = ModelSpec::kernel_bump(256, 8);
  Eigen::VectorXd xk = Eigen::VectorXd::Zero(8);
  xk[0] = 0.15;
  xk[5] = -0.02;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(8);
  u[0] = 0.15;  // on the plateau: f = 1 exactly
  const double base = 256.0 * (xk.dot(u) - u.squaredNorm() / 2.0);
  const double cube = std::pow(u.norm(), 3.0);
  CHECK(contrast_value(ker, xk, u) ==
        doctest::Approx(base + 256.0 * cube / 3.0).epsilon(1e-13));
  CHECK(contrast_value(ker, xk, Eigen::VectorXd::Zero(8)) == 0.0);

  const ModelSpec lat = ModelSpec::lattice_bump(64, 2);
  const double s = lattice_spacing(64, 2);
  Eigen::Vector2d xl(0.05, 0.12);
  Eigen::Vector2d ul(s, 0.1);
  const double lbase = 64.0 * (xl.dot(ul) - ul.squaredNorm() / 2.0);
  CHECK(contrast_value(lat, xl, ul) ==
        doctest::Approx(lbase + 64.0 * std::pow(ul.norm(), 3.0)).epsilon(1e-13));
  CHECK(contrast_value(lat, xl, Eigen::Vector2d::Zero()) == 0.0);

  Eigen::Vector3d bad(0.1, std::nan(""), 0.0);
  CHECK_THROWS_AS(contrast_value(g, x, bad), NonFinite);
  CHECK_THROWS_AS(contrast_value(g, bad, x), NonFinite);
  CHECK_THROWS_AS(contrast_value(g, x, Eigen::Vector2d::Zero()), ConfigInvalid);
}

TEST_CASE("contrast gradients match finite differences") {
  const ModelSpec g = ModelSpec::gaussian(64, 3);
  Eigen::Vector3d x(0.2, -0.1, 0.05);
  Eigen::Vector3d u(0.02, 0.07, -0.3);
  CHECK((contrast_gradient(g, x, u) - 64.0 * (x - u)).norm() < 1e-12);

  const ModelSpec ker = ModelSpec::kernel_bump(256, 8);
  Eigen::VectorXd xk = Eigen::VectorXd::Zero(8);
  xk[0] = 0.08;
  xk[3] = -0.05;
  xk[6] = 0.03;
  // At zero the bump and its gradient vanish: plain Gaussian gradient n X.
  CHECK((contrast_gradient(ker, xk, Eigen::VectorXd::Zero(8)) - 256.0 * xk).norm() <
        1e-12);

  // Ring transition point.
  Eigen::VectorXd mid = Eigen::VectorXd::Zero(8);
  mid[0] = 0.030;
  mid[1] = 0.0325;
  mid[4] = 0.05;
  check_gradient_at(ker, xk, mid);
  // Plateau point (pure cubic slope plus quadratic part).
  Eigen::VectorXd plateau = Eigen::VectorXd::Zero(8);
  plateau[0] = 0.15;
  plateau[5] = 0.04;
  check_gradient_at(ker, xk, plateau);
  // Outer cutoff band.
  Eigen::VectorXd outer = Eigen::VectorXd::Zero(8);
  outer[0] = 0.37;
  check_gradient_at(ker, xk, outer);

  const ModelSpec lat = ModelSpec::lattice_bump(64, 2);
  const double s = lattice_spacing(64, 2);
  Eigen::Vector2d xl(0.05, 0.12);
  // Mid shell: half the vicinity width off the first plane.
  check_gradient_at(lat, xl, Eigen::Vector2d(s + lat.vicinity_delta / 2.0, 0.1));
  // On the plateau band straddling nothing: plain quadratic region.
  check_gradient_at(lat, xl, Eigen::Vector2d(s / 2.0, 0.05));
  // Ball-excess branch: on a plane but leaving the admissible ball.
  const double r = lattice_ball_radius(lat);
  check_gradient_at(lat, xl, Eigen::Vector2d(0.0, r + lat.vicinity_delta / 2.0));
}

TEST_CASE("observation sampling") {
  const ModelSpec g = ModelSpec::gaussian(4, 2);
  const Eigen::VectorXd x = sample_observation(g, 42);
  REQUIRE(x.size() == 2);
  CHECK(x[0] == doctest::Approx(0.3240886806644261).epsilon(1e-13));
  CHECK(x[1] == doctest::Approx(-0.4974131159025998).epsilon(1e-13));
  CHECK((sample_observation(g, 42) - x).norm() == 0.0);

  // Coordinate variance 1/n within 5% over many draws.
  const ModelSpec big = ModelSpec::gaussian(16, 2);
  double sum_sq = 0.0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i)
    sum_sq += sample_observation(big, 1000 + static_cast<std::uint64_t>(i)).squaredNorm();
  const double var = sum_sq / (2.0 * draws);
  CHECK(var == doctest::Approx(1.0 / 16.0).epsilon(0.05));
}

TEST_CASE("activation shell membership") {
  const ModelSpec spec = ModelSpec::lattice_bump(256, 8);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(8);
  x[1] = 0.2;
  CHECK(in_activation_shell(spec, x));
  x[1] = 0.1;
  CHECK_FALSE(in_activation_shell(spec, x));
  x[1] = 0.3;
  CHECK_FALSE(in_activation_shell(spec, x));

  // First-coordinate cap: same norm, membership hinges on |x_1| <= 1.
  const ModelSpec wide = ModelSpec::lattice_bump(12, 8);
  Eigen::VectorXd tall = Eigen::VectorXd::Zero(8);
  tall[0] = 1.05;
  CHECK_FALSE(in_activation_shell(wide, tall));
  Eigen::VectorXd bent = Eigen::VectorXd::Zero(8);
  bent[0] = 0.9;
  bent[1] = std::sqrt(1.05 * 1.05 - 0.81);
  CHECK(in_activation_shell(wide, bent));
}

