#include "profmc/model.hpp"

#include <algorithm>
#include <cmath>

#include "profmc/errors.hpp"
#include "profmc/rng.hpp"

namespace profmc {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Gaussian: return "gaussian";
    case ModelKind::LatticeBump: return "lattice-bump";
    case ModelKind::KernelBump: return "kernel-bump";
  }
  throw ConfigInvalid("unknown model kind");
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "gaussian") return ModelKind::Gaussian;
  if (name == "lattice-bump") return ModelKind::LatticeBump;
  if (name == "kernel-bump") return ModelKind::KernelBump;
  throw ConfigInvalid("unknown model '" + std::string(name) +
                      "' (expected gaussian | lattice-bump | kernel-bump)");
}

ModelSpec ModelSpec::gaussian(int n, int p_total, int p_target) {
  ModelSpec spec;
  spec.kind = ModelKind::Gaussian;
  spec.n = n;
  if (p_target <= 0) p_target = std::max(1, p_total / 2);
  spec.split = BlockSplit::make(p_total, p_target);
  spec.validate();
  return spec;
}

ModelSpec ModelSpec::lattice_bump(int n, int p_total) {
  ModelSpec spec;
  spec.kind = ModelKind::LatticeBump;
  spec.n = n;
  spec.split = BlockSplit::make(p_total, 1);
  spec.vicinity_delta = 1.0 / n;
  spec.validate();
  return spec;
}

ModelSpec ModelSpec::kernel_bump(int n, int p_total, double L, double eps) {
  ModelSpec spec;
  spec.kind = ModelKind::KernelBump;
  spec.n = n;
  spec.split = BlockSplit::make(p_total, std::max(1, p_total / 2));
  spec.L = L;
  spec.outer_cutoff_eps = eps;
  spec.validate();
  return spec;
}

void ModelSpec::validate() const {
  if (n < 1) throw ConfigInvalid("ModelSpec: n must be >= 1");
  BlockSplit::make(split.p_total, split.p_target);  // re-check ranges
  switch (kind) {
    case ModelKind::Gaussian:
      break;
    case ModelKind::LatticeBump:
      if (split.p_target != 1)
        throw ConfigInvalid("ModelSpec: lattice-bump targets the first coordinate only");
      if (!(vicinity_delta > 0.0))
        throw ConfigInvalid("ModelSpec: lattice-bump needs vicinity_delta > 0");
      break;
    case ModelKind::KernelBump:
      if (split.p_total % 2 != 0 || split.p_target != split.p_total / 2)
        throw ConfigInvalid(
            "ModelSpec: kernel-bump needs even p_total with p_target = p_total/2");
      if (!(L > 0.0)) throw ConfigInvalid("ModelSpec: L must be > 0");
      if (!(outer_cutoff_eps > 0.0))
        throw ConfigInvalid("ModelSpec: outer_cutoff_eps must be > 0");
      break;
  }
}

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

double smooth_step_deriv(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double omt = 1.0 - t;
  return 30.0 * t * t * omt * omt;
}

double lattice_spacing(int n, int p_total) {
  return 0.5 * std::pow(static_cast<double>(p_total) / n, 0.75);
}

LatticeSnap snap_to_lattice(double x1, double spacing) {
  if (!(spacing > 0.0)) throw ConfigInvalid("snap_to_lattice: spacing must be > 0");
  const double t = std::abs(x1) / spacing;
  // Nudge below keeps exact multiples (up to fp noise) from rounding upward.
  const double k = std::ceil(t - 1e-9);
  const double snapped = std::copysign(k * spacing, x1);
  return LatticeSnap{snapped, std::abs(snapped - x1)};
}

Eigen::VectorXd nearest_lattice_point(const Eigen::VectorXd& x, const ModelSpec& spec) {
  Eigen::VectorXd snapped = x;
  snapped[0] = snap_to_lattice(x[0], lattice_spacing(spec.n, spec.split.p_total)).snapped;
  return snapped;
}

double lattice_ball_radius(const ModelSpec& spec) {
  return std::sqrt(2.0 * spec.split.p_total / spec.n) +
         lattice_spacing(spec.n, spec.split.p_total);
}

namespace {

// Distance of u_1 to the nearest lattice hyperplane (plain nearest multiple).
inline double lattice_line_distance(double u1, double spacing) {
  return std::abs(u1 - std::round(u1 / spacing) * spacing);
}

struct LatticeProximity {
  double d;            // max(line distance, distance beyond the ball)
  bool line_binding;   // which branch achieves the max
  double line_sign;    // sign(u1 - nearest multiple), 0 on the lattice
};

LatticeProximity lattice_proximity(const ModelSpec& spec, const Eigen::VectorXd& u) {
  const double spacing = lattice_spacing(spec.n, spec.split.p_total);
  const double nearest = std::round(u[0] / spacing) * spacing;
  const double line = std::abs(u[0] - nearest);
  const double ball_excess = u.norm() - lattice_ball_radius(spec);
  LatticeProximity prox;
  prox.line_binding = line >= ball_excess;
  prox.d = prox.line_binding ? line : ball_excess;
  prox.line_sign = (u[0] > nearest) ? 1.0 : (u[0] < nearest ? -1.0 : 0.0);
  return prox;
}

inline void check_finite(const ModelSpec& spec, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u) {
  if (x.size() != spec.split.p_total || u.size() != spec.split.p_total)
    throw ConfigInvalid("contrast: vector length does not match p_total");
  if (!x.allFinite() || !u.allFinite())
    throw NonFinite("contrast: non-finite input");
}

}  // namespace

double lattice_bump_f(const ModelSpec& spec, const Eigen::VectorXd& u) {
  const auto prox = lattice_proximity(spec, u);
  return smooth_step(1.0 - prox.d / spec.vicinity_delta);
}

double kernel_bump_f(const ModelSpec& spec, const Eigen::VectorXd& u) {
  const double root = std::sqrt(static_cast<double>(spec.split.p_total) / spec.n);
  const double ring = smooth_step(u.head(spec.split.p_target).norm() * spec.L / root - 1.0);
  const double cutoff =
      1.0 - smooth_step((u.norm() / root - 2.0) / spec.outer_cutoff_eps);
  return ring * cutoff;
}

double contrast_value(const ModelSpec& spec, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& u) {
  check_finite(spec, x, u);
  const double n = spec.n;
  double value = n * (x.dot(u) - 0.5 * u.squaredNorm());
  switch (spec.kind) {
    case ModelKind::Gaussian:
      break;
    case ModelKind::LatticeBump: {
      const double norm = u.norm();
      value += n * lattice_bump_f(spec, u) * norm * norm * norm;
      break;
    }
    case ModelKind::KernelBump: {
      const double norm = u.norm();
      value += n * kernel_bump_f(spec, u) * norm * norm * norm / 3.0;
      break;
    }
  }
  return value;
}

Eigen::VectorXd contrast_gradient(const ModelSpec& spec, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u) {
  check_finite(spec, x, u);
  const double n = spec.n;
  Eigen::VectorXd grad = n * (x - u);

  if (spec.kind == ModelKind::LatticeBump) {
    const double norm = u.norm();
    const double cube = norm * norm * norm;
    const auto prox = lattice_proximity(spec, u);
    const double arg = 1.0 - prox.d / spec.vicinity_delta;
    const double f = smooth_step(arg);
    const double fprime = smooth_step_deriv(arg);
    if (fprime != 0.0) {
      // grad f = -s'(arg)/delta * grad d, with d the binding branch.
      const double scale = -n * cube * fprime / spec.vicinity_delta;
      if (prox.line_binding) {
        grad[0] += scale * prox.line_sign;
      } else if (norm > 0.0) {
        grad += (scale / norm) * u;
      }
    }
    if (f != 0.0 && norm > 0.0) grad += (3.0 * n * f * norm) * u;
  } else if (spec.kind == ModelKind::KernelBump) {
    const double norm = u.norm();
    const double cube = norm * norm * norm;
    const double root = std::sqrt(static_cast<double>(spec.split.p_total) / spec.n);
    const auto head = u.head(spec.split.p_target);
    const double head_norm = head.norm();

    const double ring_arg = head_norm * spec.L / root - 1.0;
    const double ring = smooth_step(ring_arg);
    const double cut_arg = (norm / root - 2.0) / spec.outer_cutoff_eps;
    const double cutoff = 1.0 - smooth_step(cut_arg);
    const double f = ring * cutoff;

    Eigen::VectorXd f_grad = Eigen::VectorXd::Zero(u.size());
    const double ring_deriv = smooth_step_deriv(ring_arg);
    if (ring_deriv != 0.0 && head_norm > 0.0) {
      f_grad.head(spec.split.p_target) =
          (ring_deriv * spec.L / (root * head_norm) * cutoff) * head;
    }
    const double cut_deriv = smooth_step_deriv(cut_arg);
    if (cut_deriv != 0.0 && norm > 0.0) {
      f_grad -= (ring * cut_deriv / (spec.outer_cutoff_eps * root * norm)) * u;
    }

    grad += (n * cube / 3.0) * f_grad;
    if (f != 0.0 && norm > 0.0) grad += (n * f * norm) * u;
  }
  return grad;
}

double stationarity_residual(const ModelSpec& spec, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u) {
  if (spec.kind != ModelKind::LatticeBump)
    return contrast_gradient(spec, x, u).norm();

  check_finite(spec, x, u);
  const double spacing = lattice_spacing(spec.n, spec.split.p_total);
  const double line = lattice_line_distance(u[0], spacing);
  const double norm = u.norm();
  const double excess = norm - lattice_ball_radius(spec);
  const double arg = 1.0 - std::max(line, excess) / spec.vicinity_delta;
  const double fprime = smooth_step_deriv(arg);
  // Off the corner set, or where the smoothstep is flat across it, the
  // contrast is differentiable and the plain gradient applies. The corner
  // window is loose against the refinement precision of the maximizer but
  // far below the spacing between distinct corner events.
  const bool corner = line > 0.0 && fprime != 0.0 &&
                      std::abs(line - excess) <= 1e-3 * spec.vicinity_delta;
  if (!corner) return contrast_gradient(spec, x, u).norm();

  const double n = spec.n;
  const double f = smooth_step(arg);
  const double w = -n * norm * norm * norm * fprime / spec.vicinity_delta;
  const double nearest = std::round(u[0] / spacing) * spacing;
  const double sign = u[0] > nearest ? 1.0 : -1.0;
  const Eigen::VectorXd base = n * (x - u) + (3.0 * n * f * norm) * u;
  Eigen::VectorXd g_line = base;
  g_line[0] += w * sign;
  const Eigen::VectorXd g_shell = base + (w / norm) * u;
  // Minimum norm over the segment of one-sided gradients.
  const Eigen::VectorXd diff = g_line - g_shell;
  const double dsq = diff.squaredNorm();
  double lam = dsq > 0.0 ? -g_shell.dot(diff) / dsq : 0.0;
  lam = std::clamp(lam, 0.0, 1.0);
  return (g_shell + lam * diff).norm();
}

Eigen::VectorXd sample_observation(const ModelSpec& spec, std::uint64_t seed) {
  SplitMix64 stream(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.n));
  Eigen::VectorXd x(spec.split.p_total);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = stream.next_gaussian() * scale;
  return x;
}

bool in_activation_shell(const ModelSpec& spec, const Eigen::VectorXd& x) {
  const double ratio = static_cast<double>(spec.split.p_total) / spec.n;
  const double cube = std::pow(x.norm(), 3.0);
  return cube > 0.5 * std::pow(ratio, 1.5) && cube < std::pow(2.0 * ratio, 1.5) &&
         std::abs(x[0]) <= 1.0;
}

}  // namespace profmc
