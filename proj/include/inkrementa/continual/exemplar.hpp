#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "inkrementa/data/dataset.hpp"
#include "inkrementa/model/inc_model.hpp"
#include "inkrementa/numkit/ops.hpp"

namespace inkrementa {

/// Retained samples per class. Classes are only ever added.
class ExemplarStore {
public:
  ExemplarStore() = default;
  explicit ExemplarStore(std::size_t capacity_per_class) : capacity_(capacity_per_class) {}

  std::size_t capacity_per_class() const noexcept { return capacity_; }

  bool contains(ClassId c) const { return per_class_.contains(c); }

  std::vector<ClassId> classes() const {
    std::vector<ClassId> out;
    for (const auto& [c, _] : per_class_) out.push_back(c);
    return out;
  }

  std::size_t num_classes() const noexcept { return per_class_.size(); }

  /// Total number of retained samples.
  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [_, rows] : per_class_) n += rows.rows();
    return n;
  }

  const Matrix2D& samples_of(ClassId c) const { return per_class_.at(c); }

  void add_class(ClassId c, Matrix2D samples) {
    if (contains(c)) throw ConflictError("exemplar store already holds class " + std::to_string(c));
    per_class_.emplace(c, std::move(samples));
  }

  /// All retained samples, ascending class id, selection order within a class.
  LabeledDataset flatten() const {
    Matrix2D features;
    std::vector<ClassId> labels;
    for (const auto& [c, rows] : per_class_) {
      features.append_rows(rows);
      labels.insert(labels.end(), rows.rows(), c);
    }
    return LabeledDataset(std::move(features), std::move(labels));
  }

  friend bool operator==(const ExemplarStore&, const ExemplarStore&) = default;

private:
  std::size_t capacity_ = 1;
  std::map<ClassId, Matrix2D> per_class_;
};

/// Divides by the L2 norm; the zero vector maps to itself.
inline std::vector<double> l2_normalized(std::vector<double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq > 0.0) {
    const double n = std::sqrt(sq);
    for (auto& x : v) x /= n;
  }
  return v;
}

/// Mean of the L2-normalized embeddings of `samples` (one sample per row).
inline std::vector<double> class_feature_center(const IncModel& model, const Matrix2D& samples) {
  if (samples.rows() == 0) throw EmptyInputError("class_feature_center: empty class");
  std::vector<double> center(model.embed_dim(), 0.0);
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    const auto e = l2_normalized(model.embed(samples.row(i)));
    for (std::size_t k = 0; k < e.size(); ++k) center[k] += e[k];
  }
  const double n = static_cast<double>(samples.rows());
  for (auto& c : center) c /= n;
  return center;
}

/// Indices of the min(K, N) samples whose normalized embeddings lie nearest
/// (Euclidean) to the class feature center, ordered by (distance, index).
inline std::vector<std::size_t> herding_select(const IncModel& model, const Matrix2D& samples,
                                               std::size_t k) {
  if (k == 0) throw ArgumentError("herding_select: K must be >= 1");
  if (samples.rows() == 0) throw EmptyInputError("herding_select: empty class");
  const auto center = class_feature_center(model, samples);
  std::vector<double> dist(samples.rows());
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    const auto e = l2_normalized(model.embed(samples.row(i)));
    double sq = 0.0;
    for (std::size_t d = 0; d < e.size(); ++d) {
      const double diff = e[d] - center[d];
      sq += diff * diff;
    }
    dist[i] = std::sqrt(sq);
  }
  std::vector<std::size_t> order(samples.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t keep = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
                    });
  order.resize(keep);
  return order;
}

/// Herding-selects K exemplars for every class of `dataset` and merges them
/// into a copy of `existing`.
inline ExemplarStore build_exemplar_store(const IncModel& model, const LabeledDataset& dataset,
                                          std::size_t k,
                                          const std::optional<ExemplarStore>& existing = std::nullopt) {
  if (k == 0) throw ArgumentError("build_exemplar_store: K must be >= 1");
  ExemplarStore store = existing ? *existing : ExemplarStore(k);
  for (ClassId c : dataset.class_ids()) {
    if (store.contains(c)) {
      throw ConflictError("class " + std::to_string(c) + " is already in the exemplar store");
    }
  }
  for (ClassId c : dataset.class_ids()) {
    const auto rows = dataset.indices_of(c);
    const auto class_data = dataset.subset(rows);
    const auto picked = herding_select(model, class_data.features(), k);
    Matrix2D kept(0, dataset.dim());
    for (std::size_t i : picked) kept.append_row(class_data.sample(i));
    store.add_class(c, std::move(kept));
  }
  return store;
}

}  // namespace inkrementa
