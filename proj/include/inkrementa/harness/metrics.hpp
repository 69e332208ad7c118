#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "inkrementa/data/dataset.hpp"
#include "inkrementa/model/inc_model.hpp"

namespace inkrementa {

struct GroupTestSet {
  std::size_t group = 0;
  LabeledDataset data;
};

struct Evaluation {
  double accuracy = 0.0;  // micro-averaged over every test sample
  std::vector<double> group_accuracy;
  std::size_t correct = 0;
  std::size_t total = 0;
};

/// Argmax accuracy over the union of the given test sets, plus one accuracy
/// per set. An empty set scores 0.
inline Evaluation evaluate(const IncModel& model, const std::vector<GroupTestSet>& test_sets) {
  Evaluation out;
  for (const auto& set : test_sets) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < set.data.size(); ++i) {
      const ClassId label = set.data.labels()[i];
      if (label >= model.num_classes()) {
        throw MappingError("test label " + std::to_string(label) + " in group " +
                           std::to_string(set.group) + " is not one of the model's " +
                           std::to_string(model.num_classes()) + " classes");
      }
      if (model.predict(set.data.sample(i)) == label) ++correct;
    }
    out.correct += correct;
    out.total += set.data.size();
    out.group_accuracy.push_back(
        set.data.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(set.data.size()));
  }
  if (out.total == 0) throw EmptyInputError("evaluate: no test samples");
  out.accuracy = static_cast<double>(out.correct) / static_cast<double>(out.total);
  return out;
}

/// Model value: recognizable class count times accuracy.
inline double accn(std::size_t n, double accuracy) {
  if (n < 1) throw ArgumentError("accn: N must be >= 1");
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) {
    throw ArgumentError("accn: accuracy " + std::to_string(accuracy) + " outside [0, 1]");
  }
  return static_cast<double>(n) * accuracy;
}

}  // namespace inkrementa
