#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inkrementa/error.hpp"
#include "inkrementa/model/inc_model.hpp"
#include "inkrementa/numkit/ops.hpp"

namespace inkrementa {

enum class DistillLoss { mse, kld, l1 };

inline std::string_view to_string(DistillLoss loss) {
  switch (loss) {
    case DistillLoss::mse: return "mse";
    case DistillLoss::kld: return "kld";
    case DistillLoss::l1: return "l1";
  }
  return "mse";
}

inline DistillLoss parse_distill_loss(std::string_view text) {
  if (text == "mse") return DistillLoss::mse;
  if (text == "kld") return DistillLoss::kld;
  if (text == "l1") return DistillLoss::l1;
  throw ConfigError("unknown distill_loss '" + std::string(text) + "' (expected mse|kld|l1)");
}

/// A mini-batch: one sample per row plus its class index.
struct Batch {
  const Matrix2D& features;
  std::span<const std::size_t> labels;
};

/// Gradient of the mean batch loss, laid out like the model's parameters.
struct Gradients {
  std::vector<DenseLayer> hidden;
  Matrix2D head;
};

struct LossAndGradients {
  double loss = 0.0;
  Gradients grads;
};

namespace detail {

inline void check_step_args(const IncModel& model, const Batch& batch,
                            const TeacherSnapshot* teacher, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ArgumentError("alpha " + std::to_string(alpha) + " outside [0, 1]");
  }
  if (alpha > 0.0 && teacher == nullptr) {
    throw ArgumentError("alpha > 0 requires a teacher snapshot");
  }
  if (teacher != nullptr && teacher->num_classes() > model.num_classes()) {
    throw ShapeError("teacher has " + std::to_string(teacher->num_classes()) +
                     " classes, student only " + std::to_string(model.num_classes()));
  }
  if (batch.features.rows() != batch.labels.size()) {
    throw ShapeError("batch has " + std::to_string(batch.features.rows()) + " rows but " +
                     std::to_string(batch.labels.size()) + " labels");
  }
  if (batch.features.rows() == 0) throw EmptyInputError("empty batch");
  if (batch.features.cols() != model.input_dim()) {
    throw ShapeError("batch features " + batch.features.shape() + " do not match input_dim " +
                     std::to_string(model.input_dim()));
  }
}

/// Distillation term over the first u logits and its gradient w.r.t. them.
inline double distill_term(std::span<const double> student, std::span<const double> teacher,
                           DistillLoss kind, std::span<double> grad) {
  const std::size_t u = teacher.size();
  const double inv_u = 1.0 / static_cast<double>(u);
  switch (kind) {
    case DistillLoss::mse:
      for (std::size_t j = 0; j < u; ++j) grad[j] = 2.0 * (student[j] - teacher[j]) * inv_u;
      return mse(student, teacher);
    case DistillLoss::l1:
      for (std::size_t j = 0; j < u; ++j) {
        const double d = student[j] - teacher[j];
        grad[j] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) * inv_u;
      }
      return l1_loss(student, teacher);
    case DistillLoss::kld: {
      // KL(softmax(teacher) || softmax(student)); floored entries carry no gradient.
      const auto p = softmax(teacher);
      const auto q = softmax(student);
      double unfloored_mass = 0.0;
      for (std::size_t j = 0; j < u; ++j)
        if (q[j] >= kKlFloor) unfloored_mass += p[j];
      for (std::size_t j = 0; j < u; ++j) {
        grad[j] = q[j] * unfloored_mass - (q[j] >= kKlFloor ? p[j] : 0.0);
      }
      return kl_divergence(p, q);
    }
  }
  return 0.0;
}

}  // namespace detail

/// Mean over the batch of (1 - alpha) * CE(logits, y) + alpha * D(student[:u], teacher),
/// with the analytic gradient of every parameter.
inline LossAndGradients loss_and_gradients(const IncModel& model, const Batch& batch,
                                           const TeacherSnapshot* teacher, double alpha,
                                           DistillLoss distill_loss) {
  detail::check_step_args(model, batch, teacher, alpha);
  const bool distill = teacher != nullptr && alpha > 0.0;
  const std::size_t layers = model.hidden().size();
  const std::size_t classes = model.num_classes();
  const double inv_batch = 1.0 / static_cast<double>(batch.labels.size());

  LossAndGradients out;
  out.grads.head = Matrix2D(classes, model.embed_dim());
  for (const auto& layer : model.hidden()) {
    out.grads.hidden.push_back(
        {Matrix2D(layer.weight.rows(), layer.weight.cols()), std::vector<double>(layer.bias.size())});
  }

  std::vector<std::vector<double>> acts(layers + 1);
  std::vector<double> dlogits(classes);
  std::vector<double> dteacher;
  double total = 0.0;

  for (std::size_t s = 0; s < batch.labels.size(); ++s) {
    const std::size_t label = batch.labels[s];
    if (label >= classes) {
      throw IndexError("label " + std::to_string(label) + " out of range for " +
                       std::to_string(classes) + " classes");
    }
    auto x = batch.features.row(s);
    acts[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < layers; ++l) {
      const auto& layer = model.hidden()[l];
      acts[l + 1] = matvec(layer.weight, acts[l]);
      for (std::size_t i = 0; i < acts[l + 1].size(); ++i) {
        const double z = acts[l + 1][i] + layer.bias[i];
        acts[l + 1][i] = z > 0.0 ? z : 0.0;
      }
    }
    const auto& embedding = acts[layers];
    const auto logits = matvec(model.head(), embedding);

    // Cross-entropy part: softmax - onehot.
    const auto probs = softmax(logits);
    double sample_loss = (1.0 - alpha) * cross_entropy(logits, label);
    for (std::size_t j = 0; j < classes; ++j) {
      dlogits[j] = (1.0 - alpha) * (probs[j] - (j == label ? 1.0 : 0.0));
    }
    if (distill) {
      const auto target = teacher->forward(x).logits;
      const std::size_t u = target.size();
      dteacher.assign(u, 0.0);
      const double d = detail::distill_term(std::span<const double>(logits).first(u), target,
                                            distill_loss, dteacher);
      sample_loss += alpha * d;
      for (std::size_t j = 0; j < u; ++j) dlogits[j] += alpha * dteacher[j];
    }
    total += sample_loss;
    for (auto& g : dlogits) g *= inv_batch;

    // Head: dH += dlogits (outer) embedding; dembed = H^T dlogits.
    std::vector<double> dact(embedding.size(), 0.0);
    for (std::size_t j = 0; j < classes; ++j) {
      auto grow = out.grads.head.row(j);
      auto hrow = model.head().row(j);
      for (std::size_t k = 0; k < embedding.size(); ++k) {
        grow[k] += dlogits[j] * embedding[k];
        dact[k] += hrow[k] * dlogits[j];
      }
    }
    for (std::size_t l = layers; l-- > 0;) {
      const auto& layer = model.hidden()[l];
      auto& grad = out.grads.hidden[l];
      const auto& input = acts[l];
      std::vector<double> dinput(input.size(), 0.0);
      for (std::size_t i = 0; i < layer.weight.rows(); ++i) {
        // ReLU mask: the stored activation is positive exactly where z > 0.
        const double dz = acts[l + 1][i] > 0.0 ? dact[i] : 0.0;
        if (dz == 0.0) continue;
        grad.bias[i] += dz;
        auto grow = grad.weight.row(i);
        auto wrow = layer.weight.row(i);
        for (std::size_t k = 0; k < input.size(); ++k) {
          grow[k] += dz * input[k];
          dinput[k] += wrow[k] * dz;
        }
      }
      dact = std::move(dinput);
    }
  }
  out.loss = total * inv_batch;
  return out;
}

/// Mean batch loss only (used by gradient checks and diagnostics).
inline double batch_loss(const IncModel& model, const Batch& batch, const TeacherSnapshot* teacher,
                         double alpha, DistillLoss distill_loss) {
  detail::check_step_args(model, batch, teacher, alpha);
  const bool distill = teacher != nullptr && alpha > 0.0;
  double total = 0.0;
  for (std::size_t s = 0; s < batch.labels.size(); ++s) {
    auto x = batch.features.row(s);
    const auto logits = model.forward(x).logits;
    double sample_loss = (1.0 - alpha) * cross_entropy(logits, batch.labels[s]);
    if (distill) {
      const auto target = teacher->forward(x).logits;
      const std::span<const double> student = std::span<const double>(logits).first(target.size());
      switch (distill_loss) {
        case DistillLoss::mse: sample_loss += alpha * mse(student, target); break;
        case DistillLoss::l1: sample_loss += alpha * l1_loss(student, target); break;
        case DistillLoss::kld:
          sample_loss += alpha * kl_divergence(softmax(target), softmax(student));
          break;
      }
    }
    total += sample_loss;
  }
  return total / static_cast<double>(batch.labels.size());
}

/// In-place SGD: param -= lr * grad.
inline void apply_sgd(IncModel& model, const Gradients& grads, double lr) {
  for (std::size_t l = 0; l < model.hidden().size(); ++l) {
    auto& layer = model.hidden()[l];
    auto w = layer.weight.values();
    auto gw = grads.hidden[l].weight.values();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * gw[i];
    for (std::size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] -= lr * grads.hidden[l].bias[i];
  }
  auto h = model.head().values();
  auto gh = grads.head.values();
  for (std::size_t i = 0; i < h.size(); ++i) h[i] -= lr * gh[i];
}

/// One SGD step on the mean batch loss; returns the pre-step loss.
/// `teacher` must be non-null iff alpha > 0.
inline double backward_and_step(IncModel& model, const Batch& batch, const TeacherSnapshot* teacher,
                                double alpha, DistillLoss distill_loss, double lr) {
  if (!(lr > 0.0)) throw ArgumentError("learning rate must be > 0");
  if (teacher != nullptr && alpha == 0.0) {
    throw ArgumentError("a teacher snapshot requires alpha > 0");
  }
  auto result = loss_and_gradients(model, batch, teacher, alpha, distill_loss);
  apply_sgd(model, result.grads, lr);
  return result.loss;
}

}  // namespace inkrementa
