#include "profmc/io.hpp"

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "profmc/errors.hpp"
#include "profmc/version.hpp"

namespace profmc {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* const kColumnNames[] = {
    "master_seed", "replicate_index", "model",       "n",
    "p_total",     "p_target",        "beta_n",      "fisher_error",
    "wilks_stat",  "xi_norm_sq",      "wilks_error", "in_C1",
    "in_S_event",  "converged",       "r_localized"};
constexpr int kColumnCount = 15;

[[noreturn]] void column_error(std::size_t row, int col, const std::string& cell,
                               const char* why) {
  throw SchemaMismatch("records csv: row " + std::to_string(row) + ", column '" +
                       kColumnNames[col] + "': " + why + " ('" + cell + "')");
}

double parse_double_cell(std::size_t row, int col, const std::string& cell) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') column_error(row, col, cell, "not a number");
  return v;
}

std::uint64_t parse_u64_cell(std::size_t row, int col, const std::string& cell) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE || cell.find('-') != std::string::npos)
    column_error(row, col, cell, "not an unsigned integer");
  return static_cast<std::uint64_t>(v);
}

std::int64_t parse_i64_cell(std::size_t row, int col, const std::string& cell) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE)
    column_error(row, col, cell, "not an integer");
  return static_cast<std::int64_t>(v);
}

bool parse_bool_cell(std::size_t row, int col, const std::string& cell) {
  if (cell == "0") return false;
  if (cell == "1") return true;
  column_error(row, col, cell, "not a 0/1 boolean");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// g and r0_hat may be infinite; JSON numbers cannot, so "inf" stands in.
json json_extended_real(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  if (std::isnan(v)) return json("nan");
  return json(v);
}

double parse_extended_real(const json& node, const std::string& what) {
  if (node.is_number()) return node.get<double>();
  if (node.is_string()) {
    const auto s = node.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ConfigInvalid("config json: " + what + " must be a number or \"inf\"");
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigInvalid("config json: unknown key '" + key + "' in " + where);
  }
}

json constants_to_json(const ConditionConstants& c) {
  json obj;
  obj["nu"] = c.nu;
  obj["nu0"] = c.nu0;
  obj["nu1"] = c.nu1;
  obj["omega"] = c.omega;
  obj["g"] = json_extended_real(c.g);
  obj["delta_slope"] = c.delta_slope;
  return obj;
}

ConditionConstants constants_from_json(const json& obj) {
  if (!obj.is_object())
    throw ConfigInvalid("config json: constants_override must be an object");
  reject_unknown_keys(obj, {"nu", "nu0", "nu1", "omega", "g", "delta_slope"},
                      "constants_override");
  ConditionConstants c;
  if (obj.contains("nu")) c.nu = obj["nu"].get<double>();
  if (obj.contains("nu0")) c.nu0 = obj["nu0"].get<double>();
  if (obj.contains("nu1")) c.nu1 = obj["nu1"].get<double>();
  if (obj.contains("omega")) c.omega = obj["omega"].get<double>();
  if (obj.contains("g")) c.g = parse_extended_real(obj["g"], "constants_override.g");
  if (obj.contains("delta_slope")) c.delta_slope = obj["delta_slope"].get<double>();
  c.validate();
  return c;
}

json config_to_json_obj(const SweepConfig& config) {
  json obj;
  obj["model"] = to_string(config.model_kind);
  obj["gamma"] = config.gamma;
  obj["c"] = config.c;
  obj["n_list"] = config.n_list;
  obj["replicates"] = config.replicates;
  obj["master_seed"] = config.master_seed;
  obj["L"] = config.L;
  obj["outer_cutoff_eps"] = config.outer_cutoff_eps;
  if (config.constants_override)
    obj["constants_override"] = constants_to_json(*config.constants_override);
  return obj;
}

SweepConfig config_from_json_obj(const json& obj) {
  if (!obj.is_object()) throw ConfigInvalid("config json: top level must be an object");
  reject_unknown_keys(obj,
                      {"model", "gamma", "c", "n_list", "replicates",
                       "master_seed", "L", "outer_cutoff_eps",
                       "constants_override"},
                      "sweep config");
  SweepConfig config;
  try {
    if (obj.contains("model"))
      config.model_kind = model_kind_from_string(obj["model"].get<std::string>());
    if (obj.contains("gamma")) config.gamma = obj["gamma"].get<double>();
    if (obj.contains("c")) config.c = obj["c"].get<double>();
    if (obj.contains("n_list"))
      config.n_list = obj["n_list"].get<std::vector<std::int64_t>>();
    if (obj.contains("replicates"))
      config.replicates = obj["replicates"].get<std::int64_t>();
    if (obj.contains("master_seed"))
      config.master_seed = obj["master_seed"].get<std::uint64_t>();
    if (obj.contains("L")) config.L = obj["L"].get<double>();
    if (obj.contains("outer_cutoff_eps"))
      config.outer_cutoff_eps = obj["outer_cutoff_eps"].get<double>();
    if (obj.contains("constants_override") && !obj["constants_override"].is_null())
      config.constants_override = constants_from_json(obj["constants_override"]);
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("config json: ") + e.what());
  }
  config.validate();
  return config;
}

json parse_json_text(const std::string& text, const char* what) {
  json obj = json::parse(text, nullptr, false);
  if (obj.is_discarded())
    throw ConfigInvalid(std::string(what) + ": malformed JSON");
  return obj;
}

json row_to_json(const AggregateRow& row) {
  json r;
  r["n"] = row.n;
  r["p_total"] = row.p_total;
  r["p_target"] = row.p_target;
  r["count"] = row.count;
  r["convergence_rate"] = row.convergence_rate;
  r["in_c1_rate"] = row.in_c1_rate;
  r["in_s_rate"] = row.in_s_rate;
  r["fisher_q10"] = row.fisher_q10;
  r["fisher_q25"] = row.fisher_q25;
  r["fisher_median"] = row.fisher_median;
  r["fisher_q75"] = row.fisher_q75;
  r["wilks_q10"] = row.wilks_q10;
  r["wilks_q25"] = row.wilks_q25;
  r["wilks_median"] = row.wilks_median;
  r["wilks_q75"] = row.wilks_q75;
  r["mean_wilks_stat"] = row.mean_wilks_stat;
  r["ks_wilks_target"] = row.ks_wilks_target;
  r["ks_wilks_one"] = row.ks_wilks_one;
  r["beta_n"] = row.beta;
  r["tainted"] = row.tainted;
  return r;
}

}  // namespace

std::string records_to_csv(const std::vector<ExperimentRecord>& records) {
  std::string out(kRecordsCsvHeader);
  out.push_back('\n');
  for (const auto& rec : records) {
    out += std::to_string(rec.master_seed);
    out.push_back(',');
    out += std::to_string(rec.replicate_index);
    out.push_back(',');
    out += rec.model;
    out.push_back(',');
    out += std::to_string(rec.n);
    out.push_back(',');
    out += std::to_string(rec.p_total);
    out.push_back(',');
    out += std::to_string(rec.p_target);
    out.push_back(',');
    out += fmt_double(rec.beta);
    out.push_back(',');
    out += fmt_double(rec.fisher_error);
    out.push_back(',');
    out += fmt_double(rec.wilks_stat);
    out.push_back(',');
    out += fmt_double(rec.xi_norm_sq);
    out.push_back(',');
    out += fmt_double(rec.wilks_error);
    out.push_back(',');
    out += rec.in_c1 ? "1" : "0";
    out.push_back(',');
    out += rec.in_s_event ? "1" : "0";
    out.push_back(',');
    out += rec.converged ? "1" : "0";
    out.push_back(',');
    out += fmt_double(rec.r_localized);
    out.push_back('\n');
  }
  return out;
}

std::vector<ExperimentRecord> parse_records_csv(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::string line;
    std::stringstream ss(text);
    while (std::getline(ss, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
  }
  if (lines.empty())
    throw SchemaMismatch("records csv: empty input, expected header");
  if (lines.front() != kRecordsCsvHeader)
    throw SchemaMismatch("records csv: header mismatch, expected '" +
                         std::string(kRecordsCsvHeader) + "', got '" +
                         lines.front() + "'");

  std::vector<ExperimentRecord> records;
  records.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cells = split_csv_line(lines[i]);
    if (cells.size() != kColumnCount)
      throw SchemaMismatch("records csv: row " + std::to_string(i) +
                           ": expected " + std::to_string(kColumnCount) +
                           " fields, got " + std::to_string(cells.size()));
    ExperimentRecord rec;
    rec.master_seed = parse_u64_cell(i, 0, cells[0]);
    rec.replicate_index = parse_i64_cell(i, 1, cells[1]);
    try {
      model_kind_from_string(cells[2]);
    } catch (const std::exception&) {
      column_error(i, 2, cells[2], "not a model label");
    }
    rec.model = cells[2];
    rec.n = parse_i64_cell(i, 3, cells[3]);
    rec.p_total = static_cast<int>(parse_i64_cell(i, 4, cells[4]));
    rec.p_target = static_cast<int>(parse_i64_cell(i, 5, cells[5]));
    rec.beta = parse_double_cell(i, 6, cells[6]);
    rec.fisher_error = parse_double_cell(i, 7, cells[7]);
    rec.wilks_stat = parse_double_cell(i, 8, cells[8]);
    rec.xi_norm_sq = parse_double_cell(i, 9, cells[9]);
    rec.wilks_error = parse_double_cell(i, 10, cells[10]);
    rec.in_c1 = parse_bool_cell(i, 11, cells[11]);
    rec.in_s_event = parse_bool_cell(i, 12, cells[12]);
    rec.converged = parse_bool_cell(i, 13, cells[13]);
    rec.r_localized = parse_double_cell(i, 14, cells[14]);
    records.push_back(std::move(rec));
  }
  return records;
}

std::string sweep_config_to_json(const SweepConfig& config) {
  return config_to_json_obj(config).dump(2) + "\n";
}

SweepConfig parse_sweep_config_json(const std::string& text) {
  json obj = parse_json_text(text, "config json");
  if (obj.is_object() && obj.contains("config") && obj.contains("prng"))
    obj = obj["config"];  // a manifest wraps the config it echoes
  return config_from_json_obj(obj);
}

std::string manifest_json(const SweepConfig& config, bool tainted,
                          std::optional<double> r0_hat, double r0_x,
                          const std::string& started_at,
                          const std::string& finished_at) {
  json obj;
  obj["config"] = config_to_json_obj(config);
  obj["library_version"] = kLibraryVersion;
  obj["prng"] = {{"name", kPrngName}, {"version", kPrngVersion}};
  obj["started_at"] = started_at;
  obj["finished_at"] = finished_at;
  obj["tainted"] = tainted;
  obj["r0_hat"] = r0_hat ? json_extended_real(*r0_hat) : json(nullptr);
  obj["r0_x"] = r0_x;
  return obj.dump(2) + "\n";
}

std::optional<double> manifest_r0_hat(const std::string& text) {
  const json obj = parse_json_text(text, "manifest json");
  if (!obj.is_object() || !obj.contains("r0_hat") || obj["r0_hat"].is_null())
    return std::nullopt;
  return parse_extended_real(obj["r0_hat"], "r0_hat");
}

std::string aggregate_table_csv(const std::vector<LabeledAggregate>& items) {
  std::string out =
      "model,n,p_total,p_target,count,convergence_rate,in_c1_rate,in_s_rate,"
      "fisher_q10,fisher_q25,fisher_median,fisher_q75,wilks_q10,wilks_q25,"
      "wilks_median,wilks_q75,mean_wilks_stat,ks_wilks_target,ks_wilks_one,"
      "beta_n,tainted\n";
  for (const auto& item : items) {
    for (const auto& row : item.result.rows) {
      out += item.model;
      out.push_back(',');
      out += std::to_string(row.n);
      out.push_back(',');
      out += std::to_string(row.p_total);
      out.push_back(',');
      out += std::to_string(row.p_target);
      out.push_back(',');
      out += std::to_string(row.count);
      for (const double v :
           {row.convergence_rate, row.in_c1_rate, row.in_s_rate, row.fisher_q10,
            row.fisher_q25, row.fisher_median, row.fisher_q75, row.wilks_q10,
            row.wilks_q25, row.wilks_median, row.wilks_q75, row.mean_wilks_stat,
            row.ks_wilks_target, row.ks_wilks_one, row.beta}) {
        out.push_back(',');
        out += fmt_double(v);
      }
      out.push_back(',');
      out += row.tainted ? "1" : "0";
      out.push_back('\n');
    }
  }
  return out;
}

std::string aggregate_table_text(const std::vector<LabeledAggregate>& items) {
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof(buf),
                "%-12s %9s %7s %6s %6s %6s %6s %12s %12s %12s %9s %9s %8s %5s\n",
                "model", "n", "p_total", "count", "conv", "inC1", "inS",
                "fisher_med", "wilks_med", "mean_wstat", "ks_tgt", "ks_1",
                "beta_n", "taint");
  out += buf;
  for (const auto& item : items) {
    for (const auto& row : item.result.rows) {
      std::snprintf(buf, sizeof(buf),
                    "%-12s %9lld %7d %6lld %6.3f %6.3f %6.3f %12.5g %12.5g "
                    "%12.5g %9.4f %9.4f %8.3g %5s\n",
                    item.model.c_str(), static_cast<long long>(row.n),
                    row.p_total, static_cast<long long>(row.count),
                    row.convergence_rate, row.in_c1_rate, row.in_s_rate,
                    row.fisher_median, row.wilks_median, row.mean_wilks_stat,
                    row.ks_wilks_target, row.ks_wilks_one, row.beta,
                    row.tainted ? "yes" : "no");
      out += buf;
    }
  }
  for (const auto& item : items) {
    std::snprintf(buf, sizeof(buf),
                  "slopes[%s]: log-median fisher_error vs log n = %.5g, "
                  "log-median wilks_error vs log n = %.5g\n",
                  item.model.c_str(), item.result.fisher_slope,
                  item.result.wilks_slope);
    out += buf;
  }
  return out;
}

std::string long_format_csv(const std::vector<LabeledAggregate>& items) {
  std::string out = "model,n,p_total,metric,quantile,value\n";
  const auto emit = [&out](const std::string& model, const AggregateRow& row,
                           const char* metric, const char* quantile, double v) {
    out += model;
    out.push_back(',');
    out += std::to_string(row.n);
    out.push_back(',');
    out += std::to_string(row.p_total);
    out.push_back(',');
    out += metric;
    out.push_back(',');
    out += quantile;
    out.push_back(',');
    out += fmt_double(v);
    out.push_back('\n');
  };
  for (const auto& item : items) {
    for (const auto& row : item.result.rows) {
      emit(item.model, row, "fisher_error", "q10", row.fisher_q10);
      emit(item.model, row, "fisher_error", "q25", row.fisher_q25);
      emit(item.model, row, "fisher_error", "q50", row.fisher_median);
      emit(item.model, row, "fisher_error", "q75", row.fisher_q75);
      emit(item.model, row, "wilks_error", "q10", row.wilks_q10);
      emit(item.model, row, "wilks_error", "q25", row.wilks_q25);
      emit(item.model, row, "wilks_error", "q50", row.wilks_median);
      emit(item.model, row, "wilks_error", "q75", row.wilks_q75);
      emit(item.model, row, "wilks_stat", "mean", row.mean_wilks_stat);
      emit(item.model, row, "ks_wilks_target", "value", row.ks_wilks_target);
      emit(item.model, row, "ks_wilks_one", "value", row.ks_wilks_one);
      emit(item.model, row, "beta_n", "value", row.beta);
      emit(item.model, row, "convergence_rate", "value", row.convergence_rate);
      emit(item.model, row, "in_c1_rate", "value", row.in_c1_rate);
      emit(item.model, row, "in_s_rate", "value", row.in_s_rate);
    }
  }
  return out;
}

std::string summary_json(const std::vector<LabeledAggregate>& items) {
  json models = json::array();
  for (const auto& item : items) {
    json entry;
    entry["model"] = item.model;
    entry["tainted"] = item.result.tainted;
    entry["fisher_slope"] = item.result.fisher_slope;
    entry["wilks_slope"] = item.result.wilks_slope;
    json rows = json::array();
    for (const auto& row : item.result.rows) rows.push_back(row_to_json(row));
    entry["rows"] = std::move(rows);
    models.push_back(std::move(entry));
  }
  json obj;
  obj["models"] = std::move(models);
  return obj.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoFailure("read failed: " + path);
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const auto stamp =
      std::chrono::steady_clock::now().time_since_epoch().count();
  fs::path tmp = target;
  tmp += ".tmp" + std::to_string(stamp);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot open for writing: " + tmp.string());
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoFailure("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ec2;
    fs::remove(tmp, ec2);
    throw IoFailure("rename failed: " + tmp.string() + " -> " + path + ": " +
                    ec.message());
  }
}

std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace profmc
