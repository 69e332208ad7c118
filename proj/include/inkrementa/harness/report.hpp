#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "inkrementa/error.hpp"

namespace inkrementa {

inline constexpr const char* kToolName = "inkrementa";
inline constexpr const char* kToolVersion = "0.1.0";

struct StageReport {
  std::size_t stage = 0;
  std::size_t num_classes = 0;  // N, cumulative
  std::size_t new_classes = 0;
  double accuracy = 0.0;
  std::vector<double> group_accuracy;
  double accn = 0.0;
  double ideal_accn = 0.0;  // cumulative N (accuracy 1)
  double alpha = 0.0;
  std::optional<double> wa_gamma;
  std::size_t exemplars = 0;
  std::vector<double> epoch_loss;
  double wall_seconds = 0.0;  // kept out of the JSON so reports stay byte-stable
};

struct RunReport {
  std::string run_id;
  std::string method = "ccs";
  std::uint64_t seed = 0;
  nlohmann::ordered_json config;
  std::vector<StageReport> stages;

  const StageReport& final_stage() const { return stages.back(); }
};

/// Serializes with fixed formatting: two-space indent, insertion key order,
/// every floating-point number printed with exactly six decimals.
inline void write_fixed_json(std::ostream& out, const nlohmann::ordered_json& j, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << pad << nlohmann::json(it.key()).dump() << ": ";
        write_fixed_json(out, it.value(), indent + 2);
      }
      out << '\n' << close_pad << '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      bool scalar = true;
      for (const auto& v : j) scalar = scalar && !v.is_structured();
      if (scalar) {
        out << '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out << ", ";
          write_fixed_json(out, j[i], indent + 2);
        }
        out << ']';
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out << ",\n";
        out << pad;
        write_fixed_json(out, j[i], indent + 2);
      }
      out << '\n' << close_pad << ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out << "null";
        return;
      }
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", v == 0.0 ? 0.0 : v);
      out << buf;
      return;
    }
    default:
      out << j.dump();
  }
}

inline std::string fixed_json_string(const nlohmann::ordered_json& j) {
  std::ostringstream out;
  write_fixed_json(out, j);
  out << '\n';
  return out.str();
}

inline nlohmann::ordered_json run_report_to_json(const RunReport& report) {
  nlohmann::ordered_json doc;
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  doc["run_id"] = report.run_id;
  doc["method"] = report.method;
  doc["seed"] = report.seed;
  doc["config"] = report.config;
  auto stages = nlohmann::ordered_json::array();
  for (const auto& s : report.stages) {
    nlohmann::ordered_json js;
    js["stage"] = s.stage;
    js["N"] = s.num_classes;
    js["new_classes"] = s.new_classes;
    js["accuracy"] = s.accuracy;
    js["group_accuracy"] = s.group_accuracy;
    js["accn"] = s.accn;
    js["ideal_accn"] = s.ideal_accn;
    js["alpha"] = s.alpha;
    js["wa_gamma"] = s.wa_gamma ? nlohmann::ordered_json(*s.wa_gamma) : nlohmann::ordered_json();
    js["exemplars"] = s.exemplars;
    js["epoch_loss"] = s.epoch_loss;
    stages.push_back(std::move(js));
  }
  doc["stages"] = std::move(stages);
  if (!report.stages.empty()) {
    const auto& f = report.final_stage();
    doc["summary"] = {{"stages", report.stages.size()},
                      {"final_N", f.num_classes},
                      {"final_accuracy", f.accuracy},
                      {"final_accn", f.accn},
                      {"final_ideal_accn", f.ideal_accn}};
  }
  return doc;
}

/// Reads back the fields the summary CSV needs.
inline RunReport run_report_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("tool").get<std::string>() != kToolName) {
      throw ParseError("not an inkrementa run report");
    }
    RunReport r;
    r.run_id = doc.at("run_id").get<std::string>();
    r.method = doc.at("method").get<std::string>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& js : doc.at("stages")) {
      StageReport s;
      s.stage = js.at("stage").get<std::size_t>();
      s.num_classes = js.at("N").get<std::size_t>();
      s.new_classes = js.at("new_classes").get<std::size_t>();
      s.accuracy = js.at("accuracy").get<double>();
      s.group_accuracy = js.at("group_accuracy").get<std::vector<double>>();
      s.accn = js.at("accn").get<double>();
      s.ideal_accn = js.at("ideal_accn").get<double>();
      r.stages.push_back(std::move(s));
    }
    if (r.stages.empty()) throw ParseError("run report has no stages");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed run report: ") + e.what());
  }
}

inline void write_run_report(const RunReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << fixed_json_string(run_report_to_json(report));
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline RunReport read_run_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open run report '" + path + "'");
  try {
    return run_report_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("run report '" + path + "': " + e.what());
  }
}

struct ComparisonRow {
  std::string method;
  std::size_t stage = 0;
  std::size_t num_classes = 0;
  std::size_t runs = 0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double accn_mean = 0.0;
  double accn_std = 0.0;
};

namespace detail {
inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - m) * (x - m);
  // Sample standard deviation; a single run reports 0.
  const double sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
  return {m, sd};
}
}  // namespace detail

/// Final-stage mean/std per method, in first-appearance order.
inline std::vector<ComparisonRow> compare_final_stages(const std::vector<RunReport>& runs) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const RunReport*>> by_method;
  for (const auto& r : runs) {
    if (!by_method.contains(r.method)) order.push_back(r.method);
    by_method[r.method].push_back(&r);
  }
  std::vector<ComparisonRow> rows;
  for (const auto& method : order) {
    const auto& group = by_method[method];
    std::vector<double> acc, value;
    for (const auto* r : group) {
      acc.push_back(r->final_stage().accuracy);
      value.push_back(r->final_stage().accn);
    }
    ComparisonRow row;
    row.method = method;
    row.stage = group.front()->final_stage().stage;
    row.num_classes = group.front()->final_stage().num_classes;
    row.runs = group.size();
    std::tie(row.accuracy_mean, row.accuracy_std) = detail::mean_std(acc);
    std::tie(row.accn_mean, row.accn_std) = detail::mean_std(value);
    rows.push_back(row);
  }
  return rows;
}

/// One row per (run, stage), then one comparison row per method with
/// run_id "mean" and the final-stage mean and std across runs.
inline std::string summary_csv(const std::vector<RunReport>& runs) {
  std::ostringstream out;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6f", v == 0.0 ? 0.0 : v);
    return std::string(buf);
  };
  out << "method,run_id,seed,stage,N,accuracy,accn,ideal_accn,accuracy_std,accn_std,runs\n";
  for (const auto& r : runs) {
    for (const auto& s : r.stages) {
      out << r.method << ',' << r.run_id << ',' << r.seed << ',' << s.stage << ',' << s.num_classes
          << ',' << num(s.accuracy) << ',' << num(s.accn) << ',' << num(s.ideal_accn) << ",,,1\n";
    }
  }
  for (const auto& row : compare_final_stages(runs)) {
    out << row.method << ",mean,," << row.stage << ',' << row.num_classes << ','
        << num(row.accuracy_mean) << ',' << num(row.accn_mean) << ','
        << num(static_cast<double>(row.num_classes)) << ',' << num(row.accuracy_std) << ','
        << num(row.accn_std) << ',' << row.runs << '\n';
  }
  return out.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace inkrementa
