#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "inkrementa/data/dataset.hpp"

namespace inkrementa {

/// Ordered class-id groups: group 0 is the base service, the rest are increments.
struct StagePlan {
  std::vector<std::vector<ClassId>> groups;

  std::size_t total_classes() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.size();
    return n;
  }

  /// Checks non-empty, pairwise-disjoint groups.
  void validate() const {
    if (groups.empty()) throw PlanError("stage plan has no groups");
    std::set<ClassId> seen;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (groups[g].empty()) throw PlanError("stage group " + std::to_string(g) + " is empty");
      for (ClassId c : groups[g]) {
        if (!seen.insert(c).second) {
          throw PlanError("class " + std::to_string(c) + " appears in more than one stage group");
        }
      }
    }
  }
};

/// Consecutive id ranges of the given sizes, starting at 0.
inline StagePlan contiguous_plan(const std::vector<std::size_t>& sizes) {
  StagePlan plan;
  ClassId next = 0;
  for (auto size : sizes) {
    std::vector<ClassId> g;
    for (std::size_t i = 0; i < size; ++i) g.push_back(next++);
    plan.groups.push_back(std::move(g));
  }
  return plan;
}

struct StageData {
  LabeledDataset train;  // labels remapped
  LabeledDataset test;   // labels remapped
  std::vector<ClassId> original_classes;
};

struct StageSplit {
  std::vector<StageData> stages;
  /// original id -> contiguous id in stage-visit order.
  std::map<ClassId, ClassId> remap;
};

/// Partitions train/test by plan group and remaps labels to 0..N-1 in the
/// order classes are visited by the plan.
inline StageSplit split_stages(const LabeledDataset& train, const LabeledDataset& test,
                               const StagePlan& plan) {
  plan.validate();
  StageSplit out;
  ClassId next = 0;
  for (const auto& g : plan.groups)
    for (ClassId c : g) out.remap[c] = next++;

  for (ClassId c : train.class_ids()) {
    if (!out.remap.contains(c)) {
      throw PlanError("class " + std::to_string(c) + " of the training data is not in the stage plan");
    }
  }
  for (const auto& [c, _] : out.remap) {
    if (!std::binary_search(train.class_ids().begin(), train.class_ids().end(), c)) {
      throw PlanError("stage plan class " + std::to_string(c) + " has no training samples");
    }
  }
  for (ClassId c : test.class_ids()) {
    if (!out.remap.contains(c)) {
      throw PlanError("class " + std::to_string(c) + " of the test data is not in the stage plan");
    }
  }

  std::map<ClassId, std::size_t> group_of;
  for (std::size_t g = 0; g < plan.groups.size(); ++g)
    for (ClassId c : plan.groups[g]) group_of[c] = g;

  out.stages.resize(plan.groups.size());
  for (std::size_t g = 0; g < plan.groups.size(); ++g) {
    out.stages[g].original_classes = plan.groups[g];
    out.stages[g].train = LabeledDataset(Matrix2D(0, train.dim()), {});
    out.stages[g].test = LabeledDataset(Matrix2D(0, test.dim()), {});
  }
  for (std::size_t i = 0; i < train.size(); ++i) {
    const ClassId c = train.labels()[i];
    out.stages[group_of[c]].train.add(train.sample(i), out.remap[c]);
  }
  for (std::size_t i = 0; i < test.size(); ++i) {
    const ClassId c = test.labels()[i];
    out.stages[group_of[c]].test.add(test.sample(i), out.remap[c]);
  }
  return out;
}

}  // namespace inkrementa
