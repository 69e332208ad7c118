#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>

#include "inkrementa/data/dataset.hpp"
#include "inkrementa/numkit/rng.hpp"

namespace inkrementa {

/// Class-conditional isotropic Gaussians.
struct SyntheticSpec {
  std::size_t num_classes = 55;
  std::size_t input_dim = 8;
  std::size_t train_per_class = 100;
  std::size_t test_per_class = 20;
  double center_scale = 10.0;
  double stddev = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_classes < 1) throw ConfigError("synthetic: num_classes must be >= 1");
    if (input_dim < 1) throw ConfigError("synthetic: input_dim must be >= 1");
    if (train_per_class < 1) throw ConfigError("synthetic: train_per_class must be >= 1");
    if (test_per_class < 1) throw ConfigError("synthetic: test_per_class must be >= 1");
    if (!(stddev > 0.0)) throw ConfigError("synthetic: stddev must be > 0");
    if (!(center_scale >= 0.0)) throw ConfigError("synthetic: center_scale must be >= 0");
  }
};

struct TrainTestPair {
  LabeledDataset train;
  LabeledDataset test;
};

/// Draw order: all centers (class-major), then train samples class by class,
/// then test samples class by class. Labels are 0..num_classes-1.
inline TrainTestPair generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SeededRng rng(spec.seed);
  Matrix2D centers(spec.num_classes, spec.input_dim);
  for (auto& v : centers.values()) v = spec.center_scale * rng.normal();

  auto draw = [&](std::size_t per_class) {
    Matrix2D features(spec.num_classes * per_class, spec.input_dim);
    std::vector<ClassId> labels(features.rows());
    std::size_t r = 0;
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
      for (std::size_t n = 0; n < per_class; ++n, ++r) {
        labels[r] = c;
        for (std::size_t d = 0; d < spec.input_dim; ++d) {
          features(r, d) = centers(c, d) + spec.stddev * rng.normal();
        }
      }
    }
    return LabeledDataset(std::move(features), std::move(labels));
  };
  TrainTestPair out;
  out.train = draw(spec.train_per_class);
  out.test = draw(spec.test_per_class);
  return out;
}

}  // namespace inkrementa
