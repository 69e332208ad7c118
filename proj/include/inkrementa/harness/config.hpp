#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "inkrementa/continual/stage_update.hpp"
#include "inkrementa/data/stage_plan.hpp"
#include "inkrementa/data/synthetic.hpp"
#include "inkrementa/model/config.hpp"

namespace inkrementa {

struct SyntheticSource {
  std::size_t num_classes = 55;
  std::size_t input_dim = 8;
  std::size_t train_per_class = 100;
  std::size_t test_per_class = 20;
  double center_scale = 10.0;
  double stddev = 1.0;

  SyntheticSpec spec(std::uint64_t seed) const {
    return {num_classes, input_dim, train_per_class, test_per_class, center_scale, stddev, seed};
  }
};

struct CsvSource {
  std::string train;
  std::string test;
};

/// Everything needed to reproduce one scenario run.
struct ScenarioConfig {
  std::uint64_t seed = 0;
  std::variant<SyntheticSource, CsvSource> data = SyntheticSource{};
  StagePlan plan;
  ModelConfig model;  // input_dim is filled in from the data source
  CcsOptions ccs;
  std::string output_dir = "out";

  /// Checks everything that can be checked without touching data files.
  void validate() const {
    try {
      plan.validate();
    } catch (const PlanError& e) {
      throw ConfigError(std::string("stages: ") + e.what());
    }
    if (const auto* syn = std::get_if<SyntheticSource>(&data)) {
      syn->spec(seed).validate();
      for (const auto& g : plan.groups)
        for (ClassId c : g)
          if (c >= syn->num_classes) {
            throw ConfigError("stages: class " + std::to_string(c) + " outside synthetic range 0.." +
                              std::to_string(syn->num_classes - 1));
          }
      if (plan.total_classes() != syn->num_classes) {
        throw ConfigError("stages: plan covers " + std::to_string(plan.total_classes()) + " of " +
                          std::to_string(syn->num_classes) + " synthetic classes");
      }
    } else {
      const auto& csv = std::get<CsvSource>(data);
      if (csv.train.empty() || csv.test.empty()) {
        throw ConfigError("data.csv: both train and test paths are required");
      }
    }
    ModelConfig probe = model;
    probe.input_dim = std::max<std::size_t>(1, probe.input_dim);
    probe.validate();
    ccs.validate();
  }
};

/// Stage order of one of the four demand sequences over 55 classes
/// (ids 0..54 in blocks of 15/10/10/10/10). `user` is 1..4.
inline StagePlan user_sequence_plan(int user) {
  const auto blocks = contiguous_plan({15, 10, 10, 10, 10}).groups;
  static constexpr int kOrders[4][5] = {
      {0, 1, 2, 3, 4}, {0, 2, 4, 3, 1}, {0, 3, 4, 1, 2}, {0, 4, 1, 2, 3}};
  if (user < 1 || user > 4) throw ConfigError("user sequence must be 1..4");
  StagePlan plan;
  for (int b : kOrders[user - 1]) plan.groups.push_back(blocks[static_cast<std::size_t>(b)]);
  return plan;
}

/// Synthetic 55-class, 8-D scenario with the first demand sequence.
inline ScenarioConfig default_scenario(std::uint64_t seed = 0) {
  ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.data = SyntheticSource{};
  cfg.plan = user_sequence_plan(1);
  return cfg;
}

namespace detail {

using json = nlohmann::json;

inline void require_object(const json& j, std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
}

inline void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed,
                                std::string_view where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_field(const json& j, std::string_view key, std::string_view where, T fallback) {
  const auto it = j.find(std::string(key));
  if (it == j.end()) return fallback;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError("not a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!(it->is_number_unsigned() || (it->is_number_integer() && it->get<long long>() >= 0))) {
        throw ConfigError("not a nonnegative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError("not a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ConfigError("not a string");
    }
    return it->get<T>();
  } catch (const std::exception& e) {
    throw ConfigError(std::string(where) + "." + std::string(key) + ": " + e.what());
  }
}

}  // namespace detail

inline ScenarioConfig scenario_from_json(const nlohmann::json& doc) {
  using detail::get_field;
  using detail::json;
  detail::require_object(doc, "config");
  detail::reject_unknown_keys(doc, {"seed", "data", "stages", "model", "ccs"}, "config");

  ScenarioConfig cfg;
  cfg.seed = get_field<std::uint64_t>(doc, "seed", "config", 0);

  if (!doc.contains("data")) throw ConfigError("config: missing 'data'");
  const auto& data = doc["data"];
  detail::require_object(data, "data");
  detail::reject_unknown_keys(data, {"synthetic", "csv"}, "data");
  if (data.contains("synthetic") == data.contains("csv")) {
    throw ConfigError("data: exactly one of 'synthetic' or 'csv' is required");
  }
  if (data.contains("synthetic")) {
    const auto& s = data["synthetic"];
    detail::require_object(s, "data.synthetic");
    detail::reject_unknown_keys(s,
                                {"num_classes", "input_dim", "train_per_class", "test_per_class",
                                 "center_scale", "stddev"},
                                "data.synthetic");
    SyntheticSource src;
    src.num_classes = get_field<std::size_t>(s, "num_classes", "data.synthetic", src.num_classes);
    src.input_dim = get_field<std::size_t>(s, "input_dim", "data.synthetic", src.input_dim);
    src.train_per_class =
        get_field<std::size_t>(s, "train_per_class", "data.synthetic", src.train_per_class);
    src.test_per_class =
        get_field<std::size_t>(s, "test_per_class", "data.synthetic", src.test_per_class);
    src.center_scale = get_field<double>(s, "center_scale", "data.synthetic", src.center_scale);
    src.stddev = get_field<double>(s, "stddev", "data.synthetic", src.stddev);
    cfg.data = src;
  } else {
    const auto& c = data["csv"];
    detail::require_object(c, "data.csv");
    detail::reject_unknown_keys(c, {"train", "test"}, "data.csv");
    cfg.data = CsvSource{get_field<std::string>(c, "train", "data.csv", ""),
                         get_field<std::string>(c, "test", "data.csv", "")};
  }

  if (!doc.contains("stages") || !doc["stages"].is_array()) {
    throw ConfigError("config: 'stages' must be a list of class-id lists");
  }
  for (const auto& g : doc["stages"]) {
    if (!g.is_array()) throw ConfigError("stages: every group must be a list of class ids");
    std::vector<ClassId> group;
    for (const auto& id : g) {
      if (!id.is_number_unsigned() && !(id.is_number_integer() && id.get<long long>() >= 0)) {
        throw ConfigError("stages: class ids must be nonnegative integers");
      }
      group.push_back(id.get<ClassId>());
    }
    cfg.plan.groups.push_back(std::move(group));
  }

  if (doc.contains("model")) {
    const auto& m = doc["model"];
    detail::require_object(m, "model");
    detail::reject_unknown_keys(m, {"hidden_dims", "lr", "batch_size", "epochs_per_stage"}, "model");
    if (m.contains("hidden_dims")) {
      if (!m["hidden_dims"].is_array()) throw ConfigError("model.hidden_dims: expected a list");
      cfg.model.hidden_dims.clear();
      for (const auto& h : m["hidden_dims"]) {
        if (!h.is_number_integer()) throw ConfigError("model.hidden_dims: expected integers");
        const auto w = h.get<long long>();
        if (w < 1) throw ConfigError("model.hidden_dims: widths must be >= 1");
        cfg.model.hidden_dims.push_back(static_cast<std::size_t>(w));
      }
    }
    cfg.model.learning_rate = get_field<double>(m, "lr", "model", cfg.model.learning_rate);
    cfg.model.batch_size = get_field<std::size_t>(m, "batch_size", "model", cfg.model.batch_size);
    cfg.model.epochs_per_stage =
        get_field<std::size_t>(m, "epochs_per_stage", "model", cfg.model.epochs_per_stage);
  }

  if (doc.contains("ccs")) {
    const auto& c = doc["ccs"];
    detail::require_object(c, "ccs");
    detail::reject_unknown_keys(c,
                                {"k", "use_exemplars", "use_distillation", "use_weight_align",
                                 "distill_loss", "wa_norm", "alpha_override"},
                                "ccs");
    auto& o = cfg.ccs;
    o.k = get_field<std::size_t>(c, "k", "ccs", o.k);
    o.use_exemplars = get_field<bool>(c, "use_exemplars", "ccs", o.use_exemplars);
    o.use_distillation = get_field<bool>(c, "use_distillation", "ccs", o.use_distillation);
    o.use_weight_align = get_field<bool>(c, "use_weight_align", "ccs", o.use_weight_align);
    o.distill_loss = parse_distill_loss(
        get_field<std::string>(c, "distill_loss", "ccs", std::string(to_string(o.distill_loss))));
    o.wa_norm =
        parse_norm_kind(get_field<std::string>(c, "wa_norm", "ccs", std::string(to_string(o.wa_norm))));
    if (c.contains("alpha_override") && !c["alpha_override"].is_null()) {
      o.alpha_override = get_field<double>(c, "alpha_override", "ccs", 0.0);
    }
  }
  cfg.validate();
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return scenario_from_json(doc);
}

/// Canonical echo of a config, in the same shape the loader accepts.
inline nlohmann::ordered_json scenario_to_json(const ScenarioConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["seed"] = cfg.seed;
  if (const auto* syn = std::get_if<SyntheticSource>(&cfg.data)) {
    doc["data"]["synthetic"] = {{"num_classes", syn->num_classes},
                                {"input_dim", syn->input_dim},
                                {"train_per_class", syn->train_per_class},
                                {"test_per_class", syn->test_per_class},
                                {"center_scale", syn->center_scale},
                                {"stddev", syn->stddev}};
  } else {
    const auto& csv = std::get<CsvSource>(cfg.data);
    doc["data"]["csv"] = {{"train", csv.train}, {"test", csv.test}};
  }
  doc["stages"] = cfg.plan.groups;
  doc["model"] = {{"hidden_dims", cfg.model.hidden_dims},
                  {"lr", cfg.model.learning_rate},
                  {"batch_size", cfg.model.batch_size},
                  {"epochs_per_stage", cfg.model.epochs_per_stage}};
  const auto& o = cfg.ccs;
  doc["ccs"] = {{"k", o.k},
                {"use_exemplars", o.use_exemplars},
                {"use_distillation", o.use_distillation},
                {"use_weight_align", o.use_weight_align},
                {"distill_loss", to_string(o.distill_loss)},
                {"wa_norm", to_string(o.wa_norm)},
                {"alpha_override", nullptr}};
  if (o.alpha_override) doc["ccs"]["alpha_override"] = *o.alpha_override;
  return doc;
}

}  // namespace inkrementa
