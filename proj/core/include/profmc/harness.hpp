#pragma once

/*
 * Seeded Monte Carlo engine.
 *
 * A sweep fixes a model family, a dimension schedule p(n) = max(2,
 * ceil(c*n^gamma)) and a replicate count, then runs every (n, replicate)
 * cell through the profile optimizer. Each replicate derives its own PRNG
 * stream from (master_seed, n, p_total, replicate_index), so the set of
 * records is a pure function of the configuration: execution order and
 * worker count cannot leak into the output, and reruns are byte-identical.
 *
 * Per replicate the engine records the two Theorem-style error metrics
 * (Fisher: ||Dbreve theta_hat - xi||, Wilks: |2*excess - ||xi||^2|), the
 * event flags used to condition the analysis, and the localization radius
 * feeding the r0 estimate.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "profmc/model.hpp"
#include "profmc/theory.hpp"

namespace profmc {

struct ExperimentRecord {
  std::uint64_t master_seed = 0;
  std::int64_t replicate_index = 0;
  std::string model;
  std::int64_t n = 0;
  int p_total = 0;
  int p_target = 0;
  double beta = 0.0;        // sqrt(p_total^3 / n)
  double fisher_error = 0.0;
  double wilks_stat = 0.0;  // 2 * excess
  double xi_norm_sq = 0.0;
  double wilks_error = 0.0; // |wilks_stat - xi_norm_sq|, stored exactly
  bool in_c1 = false;       // typical-value event of the lattice analysis
  bool in_s_event = false;  // kernel bump fully engaged at the radial maximizer
  bool converged = true;
  double r_localized = 0.0; // max ||Dfull upsilon|| over both maximizers
};

struct SweepConfig {
  ModelKind model_kind = ModelKind::Gaussian;
  double gamma = 1.0 / 3.0;   // dimension exponent
  double c = 1.0;             // dimension coefficient
  std::vector<std::int64_t> n_list;
  std::int64_t replicates = 1;
  std::uint64_t master_seed = 0;
  std::optional<ConditionConstants> constants_override;
  double L = 6.0;             // kernel hole scale
  double outer_cutoff_eps = 0.25;

  void validate() const;  // throws ConfigInvalid naming the offending field
};

// p(n) = max(2, ceil(c * n^gamma)), rounded up to even for KernelBump so the
// target/nuisance split stays balanced. A 1e-9 downward nudge before ceil
// keeps exact powers (e.g. 4096^{1/3} = 16) from rounding up on platforms
// where pow overshoots by an ulp.
int dimension_for(const SweepConfig& config, std::int64_t n);

ModelSpec model_for(const SweepConfig& config, std::int64_t n);

ConditionConstants constants_for(const SweepConfig& config, const ModelSpec& spec);

// One seeded replicate: sample X, profile the contrast, compute metrics.
// Optimizer failures never throw out of here; they yield converged = false
// (metrics kept if computable, NaN if the failure preempted them).
ExperimentRecord run_replicate(const ModelSpec& spec,
                               const ConditionConstants& constants,
                               std::uint64_t master_seed,
                               std::int64_t replicate_index);

// All cells of the sweep, ordered by (n ascending, replicate ascending)
// regardless of worker count. workers < 1 is treated as 1.
std::vector<ExperimentRecord> sweep(const SweepConfig& config, int workers = 1);

struct AggregateRow {
  std::int64_t n = 0;
  int p_total = 0;
  int p_target = 0;
  std::int64_t count = 0;
  double convergence_rate = 0.0;
  double in_c1_rate = 0.0;
  double in_s_rate = 0.0;
  double fisher_q10 = 0.0, fisher_q25 = 0.0, fisher_median = 0.0, fisher_q75 = 0.0;
  double wilks_q10 = 0.0, wilks_q25 = 0.0, wilks_median = 0.0, wilks_q75 = 0.0;
  double mean_wilks_stat = 0.0;
  double ks_wilks_target = 0.0;  // wilks_stat vs chi^2 with p_target dof
  double ks_wilks_one = 0.0;     // the 1-dof reading of the same statistic
  double beta = 0.0;
  bool tainted = false;          // group convergence below 99%
};

struct AggregateResult {
  std::vector<AggregateRow> rows;  // ordered by (n, p_total)
  // Least-squares slope of log(median metric) against log(n); NaN when any
  // group median is nonpositive or fewer than two groups exist.
  double fisher_slope = 0.0;
  double wilks_slope = 0.0;
  bool tainted = false;
};

/*
 * Group records by (n, p_total) and summarize. Non-converged records stay in
 * the quantile pools while a group's convergence rate is at least 99%; below
 * that the group is marked tainted and its pools keep converged records only
 * (silent exclusion at higher rates would bias the phase-transition
 * estimates). Records whose metrics are NaN (optimizer threw) are counted in
 * the rates but can never enter a pool. Throws EmptyGroup on empty input.
 */
AggregateResult aggregate(const std::vector<ExperimentRecord>& records);

// Nearest-rank (1 - e^{-x})-quantile of r_localized across all records;
// +infinity when any record failed to converge, nullopt when fewer than
// ceil(10*e^x) records exist.
std::optional<double> records_r0(const std::vector<ExperimentRecord>& records,
                                 double x);

}  // namespace profmc
