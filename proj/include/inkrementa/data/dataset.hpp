#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "inkrementa/error.hpp"
#include "inkrementa/numkit/matrix.hpp"

namespace inkrementa {

using ClassId = std::size_t;

/// Feature rows with one integer class label per row.
class LabeledDataset {
public:
  LabeledDataset() = default;
  LabeledDataset(Matrix2D features, std::vector<ClassId> labels)
      : features_(std::move(features)), labels_(std::move(labels)) {
    if (features_.rows() != labels_.size()) {
      throw ShapeError("dataset: " + std::to_string(features_.rows()) + " rows but " +
                       std::to_string(labels_.size()) + " labels");
    }
    if (!features_.all_finite()) throw ShapeError("dataset: non-finite feature value");
    rebuild_class_ids();
  }

  const Matrix2D& features() const noexcept { return features_; }
  const std::vector<ClassId>& labels() const noexcept { return labels_; }
  /// Distinct labels in ascending order.
  const std::vector<ClassId>& class_ids() const noexcept { return class_ids_; }

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t dim() const noexcept { return features_.cols(); }

  std::span<const double> sample(std::size_t i) const { return features_.row(i); }

  void add(std::span<const double> x, ClassId label) {
    features_.append_row(x);
    labels_.push_back(label);
    auto it = std::lower_bound(class_ids_.begin(), class_ids_.end(), label);
    if (it == class_ids_.end() || *it != label) class_ids_.insert(it, label);
  }

  void append(const LabeledDataset& other) {
    features_.append_rows(other.features_);
    labels_.insert(labels_.end(), other.labels_.begin(), other.labels_.end());
    rebuild_class_ids();
  }

  LabeledDataset subset(std::span<const std::size_t> indices) const {
    LabeledDataset out;
    for (std::size_t i : indices) out.add(sample(i), labels_[i]);
    if (out.empty()) out.features_ = Matrix2D(0, dim());
    return out;
  }

  /// Row indices carrying `label`, in dataset order.
  std::vector<std::size_t> indices_of(ClassId label) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == label) out.push_back(i);
    return out;
  }

  /// Returns the dataset with every label passed through `map`.
  template <typename Fn>
  LabeledDataset relabeled(Fn&& map) const {
    std::vector<ClassId> labels(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) labels[i] = map(labels_[i]);
    return LabeledDataset(features_, std::move(labels));
  }

  Matrix2D& mutable_features() noexcept { return features_; }

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

private:
  void rebuild_class_ids() {
    class_ids_ = labels_;
    std::sort(class_ids_.begin(), class_ids_.end());
    class_ids_.erase(std::unique(class_ids_.begin(), class_ids_.end()), class_ids_.end());
  }

  Matrix2D features_;
  std::vector<ClassId> labels_;
  std::vector<ClassId> class_ids_;
};

/// Per-column z-scoring with statistics frozen from one training pool.
/// Constant columns keep a unit scale.
class Standardizer {
public:
  static Standardizer fit(const LabeledDataset& pool) {
    if (pool.empty()) throw EmptyInputError("standardizer: empty training pool");
    Standardizer s;
    const auto& f = pool.features();
    const double n = static_cast<double>(f.rows());
    s.mean_.assign(f.cols(), 0.0);
    s.scale_.assign(f.cols(), 0.0);
    for (std::size_t r = 0; r < f.rows(); ++r)
      for (std::size_t c = 0; c < f.cols(); ++c) s.mean_[c] += f(r, c);
    for (auto& m : s.mean_) m /= n;
    for (std::size_t r = 0; r < f.rows(); ++r)
      for (std::size_t c = 0; c < f.cols(); ++c) {
        const double d = f(r, c) - s.mean_[c];
        s.scale_[c] += d * d;
      }
    for (auto& v : s.scale_) {
      v = std::sqrt(v / n);
      if (!(v > 0.0)) v = 1.0;
    }
    return s;
  }

  LabeledDataset apply(const LabeledDataset& data) const {
    if (data.dim() != mean_.size() && !data.empty()) {
      throw ShapeError("standardizer fitted on dim " + std::to_string(mean_.size()) +
                       ", applied to dim " + std::to_string(data.dim()));
    }
    LabeledDataset out = data;
    auto& f = out.mutable_features();
    for (std::size_t r = 0; r < f.rows(); ++r)
      for (std::size_t c = 0; c < f.cols(); ++c) f(r, c) = (f(r, c) - mean_[c]) / scale_[c];
    return out;
  }

  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& scale() const noexcept { return scale_; }

private:
  std::vector<double> mean_;
  std::vector<double> scale_;
};

}  // namespace inkrementa
