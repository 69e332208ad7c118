#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "inkrementa/error.hpp"

namespace inkrementa {

/// Architecture and optimizer settings of an IncModel. Activation is ReLU and
/// initialization He-uniform; neither is configurable.
struct ModelConfig {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_dims{64, 32};
  double learning_rate = 0.05;
  std::size_t batch_size = 32;
  std::size_t epochs_per_stage = 30;

  void validate() const {
    if (input_dim < 1) throw ConfigError("model: input_dim must be >= 1");
    for (std::size_t i = 0; i < hidden_dims.size(); ++i) {
      if (hidden_dims[i] < 1) {
        throw ConfigError("model: hidden_dims[" + std::to_string(i) + "] must be >= 1");
      }
    }
    if (!(learning_rate > 0.0)) throw ConfigError("model: lr must be > 0");
    if (batch_size < 1) throw ConfigError("model: batch_size must be >= 1");
  }

  /// Width of the embedding fed to the prediction head.
  std::size_t embed_dim() const { return hidden_dims.empty() ? input_dim : hidden_dims.back(); }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace inkrementa
