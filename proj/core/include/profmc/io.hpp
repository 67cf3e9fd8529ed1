#pragma once

/*
 * Pinned on-disk formats.
 *
 * Records CSV (header is part of the format, one row per replicate):
 *   master_seed,replicate_index,model,n,p_total,p_target,beta_n,fisher_error,
 *   wilks_stat,xi_norm_sq,wilks_error,in_C1,in_S_event,converged,r_localized
 * Doubles are printed with %.17g so a parse round-trips bit-exactly; booleans
 * are 0/1. The CSV bytes are a pure function of the record list.
 *
 * JSON sweep config keys: model, gamma, c, n_list, replicates, master_seed,
 * L, outer_cutoff_eps, constants_override (optional object with keys nu,
 * nu0, nu1, omega, g, delta_slope). Unknown keys are rejected by name.
 * Infinities (only `g` and `r0_hat` can carry one) serialize as the string
 * "inf" because JSON has no literal for them.
 *
 * The run manifest wraps the config with provenance (library and PRNG
 * versions, timestamps, taint flag, r0_hat); parsers that want only the
 * config accept a manifest transparently.
 */

#include <optional>
#include <string>
#include <vector>

#include "profmc/harness.hpp"

namespace profmc {

inline constexpr const char* kRecordsCsvHeader =
    "master_seed,replicate_index,model,n,p_total,p_target,beta_n,fisher_error,"
    "wilks_stat,xi_norm_sq,wilks_error,in_C1,in_S_event,converged,r_localized";

std::string records_to_csv(const std::vector<ExperimentRecord>& records);

// Strict parse of the pinned schema; SchemaMismatch names the offending
// column (or the header) and the row number.
std::vector<ExperimentRecord> parse_records_csv(const std::string& text);

std::string sweep_config_to_json(const SweepConfig& config);

// Accepts either a bare sweep config object or a full run manifest (detected
// by its "config"/"prng" keys). Unknown keys raise ConfigInvalid by name.
SweepConfig parse_sweep_config_json(const std::string& text);

std::string manifest_json(const SweepConfig& config, bool tainted,
                          std::optional<double> r0_hat, double r0_x,
                          const std::string& started_at,
                          const std::string& finished_at);

// r0_hat stored in a manifest: number, "inf", or null (absent/insufficient).
std::optional<double> manifest_r0_hat(const std::string& text);

// Aggregates with the model label attached, the unit the report emitters
// consume (merged reports are keyed by model as well as (n, p)).
struct LabeledAggregate {
  std::string model;
  AggregateResult result;
};

std::string aggregate_table_csv(const std::vector<LabeledAggregate>& items);
std::string aggregate_table_text(const std::vector<LabeledAggregate>& items);
// Plot-ready long format: model,n,p_total,metric,quantile,value.
std::string long_format_csv(const std::vector<LabeledAggregate>& items);
std::string summary_json(const std::vector<LabeledAggregate>& items);

// Whole-file helpers. Writes go to a temp file in the target directory and
// are renamed into place, so readers never observe a partial file.
std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);

std::string iso8601_utc_now();

}  // namespace profmc
