#pragma once

#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "inkrementa/continual/exemplar.hpp"
#include "inkrementa/continual/weight_align.hpp"
#include "inkrementa/data/dataset.hpp"
#include "inkrementa/model/training.hpp"

namespace inkrementa {

/// User-facing switches of the stage update.
struct CcsOptions {
  std::size_t k = 1;
  bool use_exemplars = true;
  bool use_distillation = true;
  bool use_weight_align = true;
  DistillLoss distill_loss = DistillLoss::mse;
  NormKind wa_norm = NormKind::l2;
  std::optional<double> alpha_override;

  void validate() const {
    if (k < 1) throw ConfigError("ccs: k must be >= 1");
    if (alpha_override && !(*alpha_override >= 0.0 && *alpha_override < 1.0)) {
      throw ConfigError("ccs: alpha_override must lie in [0, 1)");
    }
  }

  friend bool operator==(const CcsOptions&, const CcsOptions&) = default;
};

/// Distillation weight 0.1 * u / (u + v).
inline double default_alpha(std::size_t u, std::size_t v) {
  return 0.1 * static_cast<double>(u) / static_cast<double>(u + v);
}

/// Resolved parameters of one incremental stage.
struct StageContext {
  std::size_t u = 0;
  std::size_t v = 0;
  double alpha = 0.0;
  CcsOptions options;

  static StageContext make(std::size_t u, std::size_t v, const CcsOptions& options) {
    options.validate();
    if (u < 1 || v < 1) throw ArgumentError("stage context: u and v must both be >= 1");
    StageContext ctx{u, v, options.alpha_override.value_or(default_alpha(u, v)), options};
    return ctx;
  }

  /// Weight actually used in the loss.
  double effective_alpha() const { return options.use_distillation ? alpha : 0.0; }
};

/// Shuffled mini-batch SGD over `data` for config.epochs_per_stage epochs.
/// Each epoch draws one Fisher-Yates permutation from `rng`; the final batch
/// may be short. Returns the sample-weighted mean loss of every epoch.
inline std::vector<double> train_epochs(IncModel& model, const LabeledDataset& data,
                                        const TeacherSnapshot* teacher, double alpha,
                                        DistillLoss distill_loss, const ModelConfig& config,
                                        SeededRng& rng) {
  if (data.empty()) throw ArgumentError("train_epochs: empty training set");
  std::vector<double> log;
  std::vector<std::size_t> order(data.size());
  Matrix2D features(0, data.dim());
  std::vector<std::size_t> labels;
  for (std::size_t epoch = 0; epoch < config.epochs_per_stage; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      features = Matrix2D(0, data.dim());
      labels.clear();
      for (std::size_t i = start; i < end; ++i) {
        features.append_row(data.sample(order[i]));
        labels.push_back(data.labels()[order[i]]);
      }
      const double loss = backward_and_step(model, Batch{features, labels}, teacher, alpha,
                                            distill_loss, config.learning_rate);
      epoch_loss += loss * static_cast<double>(end - start);
    }
    log.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return log;
}

struct StageUpdateResult {
  IncModel model;
  ExemplarStore store;
  std::vector<double> epoch_losses;
  std::optional<double> wa_gamma;
};

/// One incremental stage: copy the previous model, expand its head by v,
/// train on the new data (plus replayed exemplars) with optional distillation
/// from the frozen previous model, optionally weight-align the head, then
/// select exemplars for the new classes with the updated model.
///
/// `new_data` labels must be exactly u..u+v-1, where u = prev.num_classes().
inline StageUpdateResult ccs_stage_update(const IncModel& prev, const LabeledDataset& new_data,
                                          const ExemplarStore& store, const StageContext& ctx,
                                          const ModelConfig& config, SeededRng& rng) {
  if (new_data.empty()) throw ArgumentError("stage update: new data is empty");
  const std::size_t u = prev.num_classes();
  if (ctx.u != u) {
    throw ArgumentError("stage update: context u=" + std::to_string(ctx.u) + " but model has " +
                        std::to_string(u) + " classes");
  }
  for (ClassId c : new_data.class_ids()) {
    if (c < u || store.contains(c)) {
      throw ConflictError("stage update: class " + std::to_string(c) + " was already learned");
    }
  }
  const auto& ids = new_data.class_ids();
  if (ids.size() != ctx.v || ids.front() != u || ids.back() != u + ctx.v - 1) {
    throw ArgumentError("stage update: new classes must be exactly " + std::to_string(u) + ".." +
                        std::to_string(u + ctx.v - 1));
  }

  StageUpdateResult out{prev, store, {}, std::nullopt};
  out.model.expand_head(ctx.v, rng);

  const double alpha = ctx.effective_alpha();
  std::optional<TeacherSnapshot> teacher;
  if (alpha > 0.0) teacher.emplace(snapshot(prev));

  LabeledDataset training = new_data;
  if (ctx.options.use_exemplars) training.append(store.flatten());

  out.epoch_losses = train_epochs(out.model, training, teacher ? &*teacher : nullptr, alpha,
                                  ctx.options.distill_loss, config, rng);

  if (ctx.options.use_weight_align) {
    out.wa_gamma = weight_align_gamma(out.model.head(), u, ctx.v, ctx.options.wa_norm);
    out.model.set_head(weight_align(out.model.head(), u, ctx.v, ctx.options.wa_norm));
  }
  out.store = build_exemplar_store(out.model, new_data, ctx.options.k, out.store);
  return out;
}

}  // namespace inkrementa
