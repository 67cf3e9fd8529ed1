#include "profmc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>

#include "profmc/errors.hpp"
#include "profmc/information.hpp"
#include "profmc/optimizer.hpp"
#include "profmc/rng.hpp"
#include "profmc/stats.hpp"

namespace profmc {

void SweepConfig::validate() const {
  if (n_list.empty()) throw ConfigInvalid("sweep config: n_list must be nonempty");
  std::set<std::int64_t> seen;
  for (const auto n : n_list) {
    if (n < 2) throw ConfigInvalid("sweep config: n_list entries must be >= 2");
    if (n > std::numeric_limits<int>::max())
      throw ConfigInvalid("sweep config: n_list entry exceeds supported range");
    if (!seen.insert(n).second)
      throw ConfigInvalid("sweep config: n_list contains duplicate " +
                          std::to_string(n));
  }
  if (replicates < 1) throw ConfigInvalid("sweep config: replicates must be >= 1");
  if (!(c > 0.0)) throw ConfigInvalid("sweep config: c must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw ConfigInvalid("sweep config: gamma must lie in [0, 1]");
  if (!(L > 0.0)) throw ConfigInvalid("sweep config: L must be positive");
  if (!(outer_cutoff_eps > 0.0))
    throw ConfigInvalid("sweep config: outer_cutoff_eps must be positive");
  if (constants_override) constants_override->validate();
}

int dimension_for(const SweepConfig& config, std::int64_t n) {
  const double raw = config.c * std::pow(static_cast<double>(n), config.gamma);
  // Nudge before ceil: pow can overshoot exact integers by an ulp.
  int p = static_cast<int>(std::ceil(raw - 1e-9));
  p = std::max(2, p);
  if (config.model_kind == ModelKind::KernelBump && p % 2 != 0) ++p;
  return p;
}

ModelSpec model_for(const SweepConfig& config, std::int64_t n) {
  const int p = dimension_for(config, n);
  const int ni = static_cast<int>(n);
  switch (config.model_kind) {
    case ModelKind::Gaussian:
      return ModelSpec::gaussian(ni, p);
    case ModelKind::LatticeBump:
      return ModelSpec::lattice_bump(ni, p);
    case ModelKind::KernelBump:
      return ModelSpec::kernel_bump(ni, p, config.L, config.outer_cutoff_eps);
  }
  throw ConfigInvalid("sweep config: unknown model kind");
}

ConditionConstants constants_for(const SweepConfig& config, const ModelSpec& spec) {
  if (config.constants_override) return *config.constants_override;
  return default_constants(spec);
}

ExperimentRecord run_replicate(const ModelSpec& spec,
                               const ConditionConstants& constants,
                               std::uint64_t master_seed,
                               std::int64_t replicate_index) {
  spec.validate();
  constants.validate();

  ExperimentRecord rec;
  rec.master_seed = master_seed;
  rec.replicate_index = replicate_index;
  rec.model = to_string(spec.kind);
  rec.n = spec.n;
  rec.p_total = spec.split.p_total;
  rec.p_target = spec.split.p_target;
  rec.beta = beta_n(spec.n, spec.split.p_total);

  const std::uint64_t seed =
      replicate_seed(master_seed, static_cast<std::uint64_t>(spec.n),
                     static_cast<std::uint64_t>(spec.split.p_total),
                     static_cast<std::uint64_t>(replicate_index));

  try {
    const Eigen::VectorXd x = sample_observation(spec, seed);
    const ProfileResult pr = profile_result(spec, x);

    const InformationBlocks blocks =
        InformationBlocks::identity_scaled(static_cast<double>(spec.n), spec.split);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(spec.split.p_total);
    const Eigen::VectorXd grad_star = contrast_gradient(spec, x, zero);
    const Eigen::VectorXd xi =
        efficient_score(blocks, grad_star.head(spec.split.p_target),
                        grad_star.tail(spec.split.p_nuisance));
    const Eigen::MatrixXd dbreve = matrix_sqrt_psd(dbreve_squared(blocks), "Dbreve2");

    rec.fisher_error = (dbreve * pr.theta_hat - xi).norm();
    rec.wilks_stat = 2.0 * pr.excess;
    rec.xi_norm_sq = xi.squaredNorm();
    rec.wilks_error = std::abs(rec.wilks_stat - rec.xi_norm_sq);

    const Eigen::MatrixXd dfull = matrix_sqrt_psd(blocks.Dfull2, "Dfull2");
    rec.r_localized = std::max((dfull * pr.upsilon_full.values).norm(),
                               (dfull * pr.upsilon_constrained.values).norm());

    // Typical-value event: ||X||^3 in the open band
    // (0.5 (p/n)^{3/2}, (2p/n)^{3/2}) with a bounded first coordinate.
    const double ratio =
        static_cast<double>(spec.split.p_total) / static_cast<double>(spec.n);
    const double norm3 = std::pow(x.norm(), 3);
    rec.in_c1 = 0.5 * std::pow(ratio, 1.5) < norm3 &&
                norm3 < std::pow(2.0 * ratio, 1.5) && std::abs(x[0]) <= 1.0;
    rec.in_s_event = pr.in_s_event;
    rec.converged = pr.converged;
  } catch (const std::exception&) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rec.converged = false;
    rec.fisher_error = nan;
    rec.wilks_stat = nan;
    rec.xi_norm_sq = nan;
    rec.wilks_error = nan;
    rec.r_localized = nan;
    rec.in_c1 = false;
    rec.in_s_event = false;
  }
  return rec;
}

std::vector<ExperimentRecord> sweep(const SweepConfig& config, int workers) {
  config.validate();

  std::vector<std::int64_t> ns(config.n_list);
  std::sort(ns.begin(), ns.end());

  // Specs and constants are built up front so configuration errors surface
  // before any thread starts.
  std::vector<ModelSpec> specs;
  std::vector<ConditionConstants> constants;
  specs.reserve(ns.size());
  constants.reserve(ns.size());
  for (const auto n : ns) {
    specs.push_back(model_for(config, n));
    constants.push_back(constants_for(config, specs.back()));
  }

  const std::size_t jobs = ns.size() * static_cast<std::size_t>(config.replicates);
  std::vector<ExperimentRecord> records(jobs);

  auto run_job = [&](std::size_t job) {
    const std::size_t n_idx = job / static_cast<std::size_t>(config.replicates);
    const auto rep = static_cast<std::int64_t>(
        job % static_cast<std::size_t>(config.replicates));
    records[job] =
        run_replicate(specs[n_idx], constants[n_idx], config.master_seed, rep);
  };

  int count = std::max(1, workers);
  count = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(count), jobs));
  if (count <= 1) {
    for (std::size_t job = 0; job < jobs; ++job) run_job(job);
    return records;
  }

  // Disjoint slots plus an atomic cursor: scheduling cannot reorder output.
  std::atomic<std::size_t> cursor{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(count));
  for (int w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t job = cursor.fetch_add(1);
        if (job >= jobs) return;
        run_job(job);
      }
    });
  }
  for (auto& t : pool) t.join();
  return records;
}

namespace {

std::vector<double> finite_values(const std::vector<const ExperimentRecord*>& pool,
                                  double ExperimentRecord::* field) {
  std::vector<double> out;
  out.reserve(pool.size());
  for (const auto* r : pool)
    if (std::isfinite(r->*field)) out.push_back(r->*field);
  return out;
}

double quantile_or_nan(const std::vector<double>& values, double level) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  return nearest_rank_quantile(values, level);
}

double slope_of_log_medians(const std::vector<AggregateRow>& rows,
                            double AggregateRow::* median) {
  std::vector<double> xs, ys;
  for (const auto& row : rows) {
    const double m = row.*median;
    if (!(m > 0.0) || !std::isfinite(m))
      return std::numeric_limits<double>::quiet_NaN();
    xs.push_back(std::log(static_cast<double>(row.n)));
    ys.push_back(std::log(m));
  }
  return least_squares_slope(xs, ys);
}

}  // namespace

AggregateResult aggregate(const std::vector<ExperimentRecord>& records) {
  if (records.empty()) throw EmptyGroup("aggregate: no records");

  std::map<std::pair<std::int64_t, int>, std::vector<const ExperimentRecord*>>
      groups;
  for (const auto& rec : records)
    groups[{rec.n, rec.p_total}].push_back(&rec);

  AggregateResult result;
  for (const auto& [key, members] : groups) {
    AggregateRow row;
    row.n = key.first;
    row.p_total = key.second;
    row.p_target = members.front()->p_target;
    row.count = static_cast<std::int64_t>(members.size());
    row.beta = members.front()->beta;

    std::int64_t converged = 0, in_c1 = 0, in_s = 0;
    for (const auto* r : members) {
      converged += r->converged ? 1 : 0;
      in_c1 += r->in_c1 ? 1 : 0;
      in_s += r->in_s_event ? 1 : 0;
    }
    const auto total = static_cast<double>(members.size());
    row.convergence_rate = static_cast<double>(converged) / total;
    row.in_c1_rate = static_cast<double>(in_c1) / total;
    row.in_s_rate = static_cast<double>(in_s) / total;
    row.tainted = row.convergence_rate < 0.99;

    // Below the 99% bar non-converged records leave the pools (and the group
    // is flagged); above it they stay so near-misses cannot bias the tails.
    std::vector<const ExperimentRecord*> pool;
    pool.reserve(members.size());
    for (const auto* r : members)
      if (!row.tainted || r->converged) pool.push_back(r);

    const auto fisher = finite_values(pool, &ExperimentRecord::fisher_error);
    const auto wilks = finite_values(pool, &ExperimentRecord::wilks_error);
    const auto stat = finite_values(pool, &ExperimentRecord::wilks_stat);

    row.fisher_q10 = quantile_or_nan(fisher, 0.10);
    row.fisher_q25 = quantile_or_nan(fisher, 0.25);
    row.fisher_median = quantile_or_nan(fisher, 0.50);
    row.fisher_q75 = quantile_or_nan(fisher, 0.75);
    row.wilks_q10 = quantile_or_nan(wilks, 0.10);
    row.wilks_q25 = quantile_or_nan(wilks, 0.25);
    row.wilks_median = quantile_or_nan(wilks, 0.50);
    row.wilks_q75 = quantile_or_nan(wilks, 0.75);

    double sum = 0.0;
    for (const double s : stat) sum += s;
    row.mean_wilks_stat =
        stat.empty() ? std::numeric_limits<double>::quiet_NaN()
                     : sum / static_cast<double>(stat.size());
    row.ks_wilks_target = stat.size() >= 2
                              ? ks_distance(stat, row.p_target)
                              : std::numeric_limits<double>::quiet_NaN();
    row.ks_wilks_one = stat.size() >= 2
                           ? ks_distance(stat, 1)
                           : std::numeric_limits<double>::quiet_NaN();

    result.tainted = result.tainted || row.tainted;
    result.rows.push_back(std::move(row));
  }

  result.fisher_slope =
      slope_of_log_medians(result.rows, &AggregateRow::fisher_median);
  result.wilks_slope =
      slope_of_log_medians(result.rows, &AggregateRow::wilks_median);
  return result;
}

std::optional<double> records_r0(const std::vector<ExperimentRecord>& records,
                                 double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("records_r0: x must be >= 0");
  const double required = std::ceil(10.0 * std::exp(x));
  if (static_cast<double>(records.size()) < required) return std::nullopt;
  std::vector<double> radii;
  radii.reserve(records.size());
  for (const auto& rec : records) {
    if (!rec.converged) return std::numeric_limits<double>::infinity();
    radii.push_back(rec.r_localized);
  }
  return nearest_rank_quantile(std::move(radii), -std::expm1(-x));
}

}  // namespace profmc
