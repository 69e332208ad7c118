#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "inkrementa/error.hpp"
#include "inkrementa/model/inc_model.hpp"

namespace inkrementa {

inline constexpr const char* kModelFormat = "inkrementa-model-v1";

/// JSON document: format tag, config echo, per-layer shapes and row-major parameters.
/// Doubles are written with round-trip precision, so load(save(m)) == m exactly.
inline nlohmann::ordered_json model_to_json(const IncModel& model) {
  nlohmann::ordered_json doc;
  doc["format"] = kModelFormat;
  const auto& cfg = model.config();
  doc["config"] = {{"input_dim", cfg.input_dim},
                   {"hidden_dims", cfg.hidden_dims},
                   {"lr", cfg.learning_rate},
                   {"batch_size", cfg.batch_size},
                   {"epochs_per_stage", cfg.epochs_per_stage}};
  auto layers = nlohmann::ordered_json::array();
  for (const auto& layer : model.hidden()) {
    layers.push_back({{"rows", layer.weight.rows()},
                      {"cols", layer.weight.cols()},
                      {"weight", layer.weight.data()},
                      {"bias", layer.bias}});
  }
  doc["layers"] = std::move(layers);
  doc["head"] = {{"rows", model.head().rows()},
                 {"cols", model.head().cols()},
                 {"weight", model.head().data()}};
  return doc;
}

inline IncModel model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("format") || !doc["format"].is_string()) {
    throw VersionError("model document has no format field");
  }
  const auto format = doc["format"].get<std::string>();
  if (format != kModelFormat) {
    throw VersionError("unsupported model format '" + format + "' (expected " + kModelFormat + ")");
  }
  try {
    const auto& c = doc.at("config");
    ModelConfig cfg;
    cfg.input_dim = c.at("input_dim").get<std::size_t>();
    cfg.hidden_dims = c.at("hidden_dims").get<std::vector<std::size_t>>();
    cfg.learning_rate = c.at("lr").get<double>();
    cfg.batch_size = c.at("batch_size").get<std::size_t>();
    cfg.epochs_per_stage = c.at("epochs_per_stage").get<std::size_t>();
    std::vector<DenseLayer> hidden;
    for (const auto& l : doc.at("layers")) {
      hidden.push_back({Matrix2D(l.at("rows").get<std::size_t>(), l.at("cols").get<std::size_t>(),
                                 l.at("weight").get<std::vector<double>>()),
                        l.at("bias").get<std::vector<double>>()});
    }
    const auto& h = doc.at("head");
    Matrix2D head(h.at("rows").get<std::size_t>(), h.at("cols").get<std::size_t>(),
                  h.at("weight").get<std::vector<double>>());
    return make_model(std::move(cfg), std::move(hidden), std::move(head));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model document: ") + e.what());
  }
}

inline void save_model(const IncModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << model_to_json(model).dump(1) << '\n';
}

inline IncModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model file '" + path + "': " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace inkrementa
