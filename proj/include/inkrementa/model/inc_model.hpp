#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "inkrementa/error.hpp"
#include "inkrementa/model/config.hpp"
#include "inkrementa/numkit/matrix.hpp"
#include "inkrementa/numkit/rng.hpp"

namespace inkrementa {

/// Fully connected layer followed by ReLU. `weight` is (out x in).
struct DenseLayer {
  Matrix2D weight;
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct ForwardResult {
  std::vector<double> logits;
  std::vector<double> embedding;
};

struct BatchForwardResult {
  Matrix2D logits;      // (batch x num_classes)
  Matrix2D embeddings;  // (batch x embed_dim)
};

namespace detail {
inline void he_uniform_fill(std::span<double> values, std::size_t fan_in, SeededRng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (auto& v : values) v = rng.uniform(-limit, limit);
}
}  // namespace detail

/// Feed-forward ReLU classifier with an expandable, bias-free prediction head.
///
/// Row j of `head()` is the weight vector of class j. The embedding is the
/// activation of the last hidden layer, or the raw input when there are no
/// hidden layers.
class IncModel {
public:
  IncModel() = default;

  /// He-uniform weights, zero biases. Draw order: hidden layers front to
  /// back (weights row-major), then head rows.
  static IncModel init(const ModelConfig& config, std::size_t num_classes, SeededRng& rng) {
    config.validate();
    if (num_classes < 1) throw ConfigError("model: num_classes must be >= 1");
    IncModel m;
    m.config_ = config;
    std::size_t fan_in = config.input_dim;
    for (std::size_t width : config.hidden_dims) {
      DenseLayer layer{Matrix2D(width, fan_in), std::vector<double>(width, 0.0)};
      detail::he_uniform_fill(layer.weight.values(), fan_in, rng);
      m.hidden_.push_back(std::move(layer));
      fan_in = width;
    }
    m.head_ = Matrix2D(num_classes, fan_in);
    detail::he_uniform_fill(m.head_.values(), fan_in, rng);
    return m;
  }

  const ModelConfig& config() const noexcept { return config_; }
  std::size_t input_dim() const noexcept { return config_.input_dim; }
  std::size_t embed_dim() const noexcept { return head_.cols(); }
  std::size_t num_classes() const noexcept { return head_.rows(); }

  const std::vector<DenseLayer>& hidden() const noexcept { return hidden_; }
  std::vector<DenseLayer>& hidden() noexcept { return hidden_; }
  const Matrix2D& head() const noexcept { return head_; }
  Matrix2D& head() noexcept { return head_; }

  /// Replaces the head; the width must match the embedding.
  void set_head(Matrix2D head) {
    if (head.cols() != embed_dim() || head.rows() < 1) {
      throw ShapeError("set_head: head " + head.shape() + " incompatible with embed_dim " +
                       std::to_string(embed_dim()));
    }
    head_ = std::move(head);
  }

  std::vector<double> embed(std::span<const double> x) const {
    if (x.size() != input_dim()) {
      throw ShapeError("forward: input length " + std::to_string(x.size()) +
                       " does not match input_dim " + std::to_string(input_dim()));
    }
    std::vector<double> act(x.begin(), x.end());
    for (const auto& layer : hidden_) {
      act = matvec(layer.weight, act);
      for (std::size_t i = 0; i < act.size(); ++i) {
        const double z = act[i] + layer.bias[i];
        act[i] = z > 0.0 ? z : 0.0;
      }
    }
    return act;
  }

  ForwardResult forward(std::span<const double> x) const {
    ForwardResult out;
    out.embedding = embed(x);
    out.logits = matvec(head_, out.embedding);
    return out;
  }

  BatchForwardResult forward_batch(const Matrix2D& x) const {
    BatchForwardResult out{Matrix2D(x.rows(), num_classes()), Matrix2D(x.rows(), embed_dim())};
    for (std::size_t r = 0; r < x.rows(); ++r) {
      auto res = forward(x.row(r));
      std::copy(res.logits.begin(), res.logits.end(), out.logits.row(r).begin());
      std::copy(res.embedding.begin(), res.embedding.end(), out.embeddings.row(r).begin());
    }
    return out;
  }

  /// argmax over the logits; ties resolve to the lowest class index.
  std::size_t predict(std::span<const double> x) const {
    const auto logits = forward(x).logits;
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.size(); ++j)
      if (logits[j] > logits[best]) best = j;
    return best;
  }

  /// Grows the head by `v` He-uniform rows. Existing rows are left untouched.
  void expand_head(std::size_t v, SeededRng& rng) {
    if (v == 0) throw ArgumentError("expand_head: v must be >= 1");
    Matrix2D added(v, embed_dim());
    detail::he_uniform_fill(added.values(), embed_dim(), rng);
    head_.append_rows(added);
  }

  /// Visits every trainable parameter block in a fixed order: per hidden
  /// layer (weight, bias), then the head.
  template <typename Fn>
  void for_each_parameter(Fn&& fn) {
    for (auto& layer : hidden_) {
      fn(layer.weight.values());
      fn(std::span<double>(layer.bias));
    }
    fn(head_.values());
  }

  std::size_t parameter_count() const {
    std::size_t n = head_.size();
    for (const auto& layer : hidden_) n += layer.weight.size() + layer.bias.size();
    return n;
  }

  friend bool operator==(const IncModel&, const IncModel&) = default;

private:
  ModelConfig config_;
  std::vector<DenseLayer> hidden_;
  Matrix2D head_;

  friend IncModel make_model(ModelConfig, std::vector<DenseLayer>, Matrix2D);
};

/// Assembles a model from explicit parameters (used by deserialization and tests).
inline IncModel make_model(ModelConfig config, std::vector<DenseLayer> hidden, Matrix2D head) {
  config.validate();
  std::size_t fan_in = config.input_dim;
  if (hidden.size() != config.hidden_dims.size()) {
    throw ShapeError("make_model: " + std::to_string(hidden.size()) + " layers given, config has " +
                     std::to_string(config.hidden_dims.size()));
  }
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    const auto& layer = hidden[l];
    if (layer.weight.rows() != config.hidden_dims[l] || layer.weight.cols() != fan_in ||
        layer.bias.size() != layer.weight.rows()) {
      throw ShapeError("make_model: layer " + std::to_string(l) + " has shape " +
                       layer.weight.shape() + " with " + std::to_string(layer.bias.size()) +
                       " biases");
    }
    fan_in = layer.weight.rows();
  }
  if (head.cols() != fan_in || head.rows() < 1) {
    throw ShapeError("make_model: head " + head.shape() + " incompatible with embed_dim " +
                     std::to_string(fan_in));
  }
  IncModel m;
  m.config_ = std::move(config);
  m.hidden_ = std::move(hidden);
  m.head_ = std::move(head);
  return m;
}

/// Free-function form: returns an expanded copy.
inline IncModel expand_head(IncModel model, std::size_t v, SeededRng& rng) {
  model.expand_head(v, rng);
  return model;
}

/// Frozen deep copy of a model; only read access is exposed.
class TeacherSnapshot {
public:
  explicit TeacherSnapshot(IncModel model) : model_(std::move(model)) {}

  ForwardResult forward(std::span<const double> x) const { return model_.forward(x); }
  std::size_t num_classes() const noexcept { return model_.num_classes(); }
  const IncModel& model() const noexcept { return model_; }

private:
  IncModel model_;
};

inline TeacherSnapshot snapshot(const IncModel& model) { return TeacherSnapshot(model); }

}  // namespace inkrementa
