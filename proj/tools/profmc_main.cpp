/*
 * Command-line front end for the profile M-estimation simulator.
 *
 *   simulate  run one seeded sweep; writes records.csv, manifest.json and
 *             summary.json into --out, prints the aggregate per --format.
 *   bounds    evaluate the non-asymptotic Fisher/Wilks right-hand sides for
 *             given r0, x, dimensions and constants; prints a JSON object.
 *   report    aggregate one or more record CSVs (merged across files, keyed
 *             by model, n, p); writes aggregate.csv, aggregate.txt, long.csv
 *             and summary.json when --out is given.
 *
 * Config precedence: explicit flags > --config file values > built-in
 * defaults. The master seed must come from one of the first two; there is no
 * time-based fallback, a run without a seed is a usage error.
 *
 * Exit codes: 0 success, 2 usage/config/schema error, 3 completed but
 * tainted (a dimension group fell below 99% optimizer convergence),
 * 4 I/O failure.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "profmc/errors.hpp"
#include "profmc/harness.hpp"
#include "profmc/io.hpp"
#include "profmc/stats.hpp"
#include "profmc/theory.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitTainted = 3;
constexpr int kExitIo = 4;

nlohmann::json extended_real(double v) {
  if (std::isinf(v)) return v > 0 ? nlohmann::json("inf") : nlohmann::json("-inf");
  if (std::isnan(v)) return nlohmann::json("nan");
  return nlohmann::json(v);
}

struct SimulateArgs {
  std::string model;
  std::vector<std::int64_t> n_list;
  double gamma = 0.0;
  double c = 0.0;
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  double l_scale = 0.0;
  double eps_cutoff = 0.0;
  std::string out;
  std::string config_path;
  std::string format = "csv";
};

// Merge precedence: start from defaults, overlay the config file, overlay
// explicit flags. Returns the merged config and whether a seed was supplied.
profmc::SweepConfig merge_simulate_config(const CLI::App& cmd,
                                          const SimulateArgs& args,
                                          bool& seed_given) {
  profmc::SweepConfig config;
  seed_given = false;

  if (!args.config_path.empty()) {
    const std::string text = profmc::read_file(args.config_path);
    nlohmann::json obj = nlohmann::json::parse(text, nullptr, false);
    if (obj.is_discarded())
      throw profmc::ConfigInvalid("config file: malformed JSON");
    if (obj.is_object() && obj.contains("config") && obj.contains("prng"))
      obj = obj["config"];  // accept a manifest wherever a config is accepted
    if (obj.is_object()) {
      // CLI-level keys ride along in config files; strip before the strict
      // sweep-config parse.
      for (const char* key : {"out", "format", "workers"}) obj.erase(key);
    }
    config = profmc::parse_sweep_config_json(obj.dump());
    seed_given = obj.is_object() && obj.contains("master_seed");
  }

  if (cmd.count("--model") > 0)
    config.model_kind = profmc::model_kind_from_string(args.model);
  if (cmd.count("--n") > 0) config.n_list = args.n_list;
  if (cmd.count("--gamma") > 0) config.gamma = args.gamma;
  if (cmd.count("--c") > 0) config.c = args.c;
  if (cmd.count("--replicates") > 0) config.replicates = args.replicates;
  if (cmd.count("--seed") > 0) {
    config.master_seed = args.seed;
    seed_given = true;
  }
  if (cmd.count("--L") > 0) config.L = args.l_scale;
  if (cmd.count("--eps-cutoff") > 0) config.outer_cutoff_eps = args.eps_cutoff;
  return config;
}

int run_simulate(const CLI::App& cmd, const SimulateArgs& args) {
  bool seed_given = false;
  profmc::SweepConfig config = merge_simulate_config(cmd, args, seed_given);
  if (!seed_given)
    throw profmc::ConfigInvalid(
        "simulate: --seed (or master_seed in --config) is required; "
        "runs are never seeded from the clock");
  if (args.out.empty())
    throw profmc::ConfigInvalid("simulate: --out DIR is required");
  config.validate();

  const std::string started = profmc::iso8601_utc_now();
  const auto records = profmc::sweep(config, args.workers);
  const std::string finished = profmc::iso8601_utc_now();

  const auto agg = profmc::aggregate(records);
  const auto r0_hat = profmc::records_r0(records, 3.0);

  std::error_code ec;
  std::filesystem::create_directories(args.out, ec);
  if (ec)
    throw profmc::IoFailure("cannot create output directory " + args.out +
                            ": " + ec.message());
  const std::filesystem::path out(args.out);
  profmc::write_file_atomic((out / "records.csv").string(),
                            profmc::records_to_csv(records));
  profmc::write_file_atomic(
      (out / "manifest.json").string(),
      profmc::manifest_json(config, agg.tainted, r0_hat, 3.0, started, finished));

  const std::vector<profmc::LabeledAggregate> labeled{
      {profmc::to_string(config.model_kind), agg}};
  profmc::write_file_atomic((out / "summary.json").string(),
                            profmc::summary_json(labeled));

  if (args.format == "json")
    std::cout << profmc::summary_json(labeled);
  else
    std::cout << profmc::aggregate_table_text(labeled);

  if (agg.tainted) {
    std::cerr << "warning: sweep tainted (a group fell below 99% convergence)\n";
    return kExitTainted;
  }
  return kExitOk;
}

struct BoundsArgs {
  double r0 = 0.0;
  double x = 3.0;
  int p_total = 0;
  int p_target = 0;
  double xi_norm = 0.0;
  double nu = 0.0;
  double nu0 = 1.0;
  double nu1 = 1.0;
  double omega = 0.0;
  double g = std::numeric_limits<double>::infinity();
  double delta_slope = 0.0;
  std::string config_path;
};

int run_bounds(const CLI::App& cmd, const BoundsArgs& args) {
  double r0 = args.r0;
  double x = args.x;
  if (!args.config_path.empty()) {
    const std::string text = profmc::read_file(args.config_path);
    const auto stored = profmc::manifest_r0_hat(text);
    if (!stored)
      throw profmc::ConfigInvalid(
          "bounds: manifest carries no r0_hat (insufficient replicates?)");
    if (cmd.count("--r0") == 0) r0 = *stored;
    // The manifest records the confidence the radius was estimated at.
    nlohmann::json obj = nlohmann::json::parse(text);
    if (cmd.count("--x") == 0 && obj.contains("r0_x"))
      x = obj["r0_x"].get<double>();
  } else if (cmd.count("--r0") == 0) {
    throw profmc::ConfigInvalid("bounds: --r0 or --config MANIFEST is required");
  }

  const auto dims = profmc::BlockSplit::make(args.p_total, args.p_target);
  const auto constants = profmc::ConditionConstants::make(
      args.nu, args.nu0, args.nu1, args.omega, args.g, args.delta_slope);

  const auto breve = profmc::breve_constants(constants.g, constants.nu);
  const double q = 2.0 * dims.p_total + 2.0 * dims.p_target;
  const double z = profmc::entropy_term(x, q, breve.g_breve);
  const double sp = profmc::spread(r0, x, dims.p_total, dims.p_target, constants);
  const auto bounds = profmc::theorem_bounds(args.xi_norm, r0, x, dims, constants);

  nlohmann::json result;
  result["r0"] = extended_real(r0);
  result["x"] = x;
  result["p_total"] = dims.p_total;
  result["p_target"] = dims.p_target;
  result["xi_norm"] = args.xi_norm;
  result["constants"] = {{"nu", constants.nu},
                         {"nu0", constants.nu0},
                         {"nu1", constants.nu1},
                         {"omega", constants.omega},
                         {"g", extended_real(constants.g)},
                         {"delta_slope", constants.delta_slope}};
  result["entropy_term"] = extended_real(z);
  result["spread"] = extended_real(sp);
  result["fisher_rhs"] = extended_real(bounds.fisher_rhs);
  result["wilks_rhs"] = extended_real(bounds.wilks_rhs);
  std::cout << result.dump(2) << "\n";
  return kExitOk;
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::string format = "csv";
};

int run_report(const ReportArgs& args) {
  std::vector<std::string> files;
  for (const auto& input : args.inputs) {
    std::error_code ec;
    if (std::filesystem::is_directory(input, ec)) {
      for (const auto& entry : std::filesystem::directory_iterator(input))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
          files.push_back(entry.path().string());
    } else {
      files.push_back(input);
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw profmc::ConfigInvalid("report: no input CSVs found");

  std::vector<profmc::ExperimentRecord> records;
  for (const auto& file : files) {
    auto part = profmc::parse_records_csv(profmc::read_file(file));
    records.insert(records.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
  }
  if (records.empty())
    throw profmc::ConfigInvalid("report: inputs contain no records");

  // Key aggregates by model first; each model aggregates by (n, p).
  std::map<std::string, std::vector<profmc::ExperimentRecord>> by_model;
  for (auto& rec : records) by_model[rec.model].push_back(std::move(rec));
  std::vector<profmc::LabeledAggregate> labeled;
  for (auto& [model, group] : by_model)
    labeled.push_back({model, profmc::aggregate(group)});

  if (!args.out.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(args.out, ec);
    if (ec)
      throw profmc::IoFailure("cannot create output directory " + args.out +
                              ": " + ec.message());
    const std::filesystem::path out(args.out);
    profmc::write_file_atomic((out / "aggregate.csv").string(),
                              profmc::aggregate_table_csv(labeled));
    profmc::write_file_atomic((out / "aggregate.txt").string(),
                              profmc::aggregate_table_text(labeled));
    profmc::write_file_atomic((out / "long.csv").string(),
                              profmc::long_format_csv(labeled));
    profmc::write_file_atomic((out / "summary.json").string(),
                              profmc::summary_json(labeled));
  }

  if (args.format == "json")
    std::cout << profmc::summary_json(labeled);
  else
    std::cout << profmc::aggregate_table_csv(labeled)
              << profmc::aggregate_table_text(labeled);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"profile M-estimation simulator and bound calculator"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "run one seeded sweep");
  simulate->add_option("--model", sim.model, "gaussian|lattice-bump|kernel-bump");
  simulate->add_option("--n", sim.n_list, "sample sizes (repeatable or comma list)")
      ->delimiter(',');
  simulate->add_option("--gamma", sim.gamma, "dimension exponent in p = ceil(c n^gamma)");
  simulate->add_option("--c", sim.c, "dimension coefficient");
  simulate->add_option("--replicates", sim.replicates, "replicates per n");
  simulate->add_option("--seed", sim.seed, "master seed (required; no clock fallback)");
  simulate->add_option("--workers", sim.workers, "worker threads (output independent)");
  simulate->add_option("--L", sim.l_scale, "kernel hole scale");
  simulate->add_option("--eps-cutoff", sim.eps_cutoff, "kernel outer cutoff width");
  simulate->add_option("--out", sim.out, "output directory");
  simulate->add_option("--config", sim.config_path, "JSON config or manifest");
  simulate->add_option("--format", sim.format, "stdout format: csv|json")
      ->check(CLI::IsMember({"csv", "json"}));

  BoundsArgs bnd;
  CLI::App* bounds = app.add_subcommand("bounds", "evaluate theorem right-hand sides");
  bounds->add_option("--r0", bnd.r0, "localization radius");
  bounds->add_option("--x", bnd.x, "confidence parameter");
  bounds->add_option("--p-total", bnd.p_total, "full dimension")->required();
  bounds->add_option("--p-target", bnd.p_target, "target dimension")->required();
  bounds->add_option("--xi-norm", bnd.xi_norm, "norm of the efficient score");
  bounds->add_option("--nu", bnd.nu, "coupling constant");
  bounds->add_option("--nu0", bnd.nu0, "score moment constant");
  bounds->add_option("--nu1", bnd.nu1, "gradient moment constant");
  bounds->add_option("--omega", bnd.omega, "gradient scale");
  bounds->add_option("--g", bnd.g, "moment range (inf for the direct branch)");
  bounds->add_option("--delta-slope", bnd.delta_slope, "smoothness slope");
  bounds->add_option("--config", bnd.config_path, "manifest to read r0_hat from");

  ReportArgs rep;
  CLI::App* report = app.add_subcommand("report", "aggregate record CSVs");
  report->add_option("--in", rep.inputs, "record CSV files or directories")
      ->required();
  report->add_option("--out", rep.out, "output directory");
  report->add_option("--format", rep.format, "stdout format: csv|json")
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (simulate->parsed()) return run_simulate(*simulate, sim);
    if (bounds->parsed()) return run_bounds(*bounds, bnd);
    return run_report(rep);
  } catch (const profmc::IoFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
