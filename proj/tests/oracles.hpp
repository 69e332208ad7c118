#pragma once

// Independent reference implementations used only by the tests. Nothing here
// calls into the code path it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "inkrementa/inkrementa.hpp"

namespace inkrementa::oracle {

inline Matrix2D naive_matmul(const Matrix2D& a, const Matrix2D& b) {
  Matrix2D out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  return out;
}

inline Matrix2D random_matrix(std::size_t r, std::size_t c, SeededRng& rng, double scale = 1.0) {
  Matrix2D m(r, c);
  for (auto& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

/// Embedding computed with explicit loops over the layer parameters.
inline std::vector<double> embed(const IncModel& model, std::span<const double> x) {
  std::vector<double> act(x.begin(), x.end());
  for (const auto& layer : model.hidden()) {
    std::vector<double> next(layer.weight.rows());
    for (std::size_t i = 0; i < next.size(); ++i) {
      double z = layer.bias[i];
      for (std::size_t k = 0; k < act.size(); ++k) z += layer.weight(i, k) * act[k];
      next[i] = std::max(z, 0.0);
    }
    act = std::move(next);
  }
  return act;
}

/// Normalize -> average -> distance -> full stable sort by (distance, index).
inline std::vector<std::size_t> brute_force_herding(const IncModel& model, const Matrix2D& samples,
                                                    std::size_t k) {
  const std::size_t n = samples.rows();
  std::vector<std::vector<double>> normed;
  for (std::size_t i = 0; i < n; ++i) {
    auto e = embed(model, samples.row(i));
    double sq = 0.0;
    for (double v : e) sq += v * v;
    if (sq > 0.0) {
      const double norm = std::sqrt(sq);
      for (auto& v : e) v /= norm;
    }
    normed.push_back(std::move(e));
  }
  std::vector<double> center(normed.front().size(), 0.0);
  for (const auto& e : normed)
    for (std::size_t d = 0; d < e.size(); ++d) center[d] += e[d];
  for (auto& c : center) c /= static_cast<double>(n);
  std::vector<std::pair<double, std::size_t>> keyed;
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (std::size_t d = 0; d < center.size(); ++d) sq += (normed[i][d] - center[d]) * (normed[i][d] - center[d]);
    keyed.emplace_back(std::sqrt(sq), i);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < std::min(k, n); ++i) out.push_back(keyed[i].second);
  return out;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t parameters = 0;
  std::size_t worst_index = 0;
};

/// Relative error |a - n| / max(|a|, |n|); pairs where both magnitudes are
/// below `zero_floor` are compared absolutely against the same floor.
inline double relative_error(double analytic, double numeric, double zero_floor = 1e-8) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  const double diff = std::abs(analytic - numeric);
  if (scale < zero_floor) return diff / zero_floor;
  return diff / scale;
}

/// Central finite differences of batch_loss for every parameter.
inline GradCheckResult finite_difference_check(IncModel model, const Batch& batch,
                                               const TeacherSnapshot* teacher, double alpha,
                                               DistillLoss loss, double h = 1e-5) {
  const auto analytic = loss_and_gradients(model, batch, teacher, alpha, loss).grads;
  std::vector<double> flat_analytic;
  for (const auto& layer : analytic.hidden) {
    flat_analytic.insert(flat_analytic.end(), layer.weight.data().begin(), layer.weight.data().end());
    flat_analytic.insert(flat_analytic.end(), layer.bias.begin(), layer.bias.end());
  }
  flat_analytic.insert(flat_analytic.end(), analytic.head.data().begin(), analytic.head.data().end());

  std::vector<std::span<double>> blocks;
  model.for_each_parameter([&](std::span<double> b) { blocks.push_back(b); });
  GradCheckResult out;
  std::size_t idx = 0;
  for (auto block : blocks) {
    for (auto& p : block) {
      const double saved = p;
      p = saved + h;
      const double up = batch_loss(model, batch, teacher, alpha, loss);
      p = saved - h;
      const double down = batch_loss(model, batch, teacher, alpha, loss);
      p = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = relative_error(flat_analytic[idx], numeric);
      if (err > out.max_rel_error) {
        out.max_rel_error = err;
        out.worst_index = idx;
      }
      ++idx;
    }
  }
  out.parameters = idx;
  return out;
}

/// Plain cross-entropy SGD step written against the raw parameters.
/// Accumulation order mirrors a straightforward per-sample backprop.
inline void plain_ce_sgd_step(IncModel& model, const Matrix2D& x, const std::vector<std::size_t>& y,
                              double lr) {
  const std::size_t layers = model.hidden().size();
  std::vector<Matrix2D> gw;
  std::vector<std::vector<double>> gb;
  for (const auto& l : model.hidden()) {
    gw.emplace_back(l.weight.rows(), l.weight.cols());
    gb.emplace_back(l.bias.size(), 0.0);
  }
  Matrix2D gh(model.head().rows(), model.head().cols());
  const double inv_b = 1.0 / static_cast<double>(y.size());
  for (std::size_t s = 0; s < y.size(); ++s) {
    std::vector<std::vector<double>> acts{std::vector<double>(x.row(s).begin(), x.row(s).end())};
    for (const auto& l : model.hidden()) {
      std::vector<double> next(l.weight.rows());
      for (std::size_t i = 0; i < next.size(); ++i) {
        double z = 0.0;
        for (std::size_t k = 0; k < acts.back().size(); ++k) z += l.weight(i, k) * acts.back()[k];
        z += l.bias[i];
        next[i] = z > 0.0 ? z : 0.0;
      }
      acts.push_back(std::move(next));
    }
    const auto& e = acts.back();
    std::vector<double> logits(model.head().rows());
    for (std::size_t j = 0; j < logits.size(); ++j) {
      double z = 0.0;
      for (std::size_t k = 0; k < e.size(); ++k) z += model.head()(j, k) * e[k];
      logits[j] = z;
    }
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double total = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) total += (p[j] = std::exp(logits[j] - peak));
    for (auto& v : p) v /= total;
    std::vector<double> dz(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) dz[j] = (p[j] - (j == y[s] ? 1.0 : 0.0)) * inv_b;
    std::vector<double> da(e.size(), 0.0);
    for (std::size_t j = 0; j < dz.size(); ++j)
      for (std::size_t k = 0; k < e.size(); ++k) {
        gh(j, k) += dz[j] * e[k];
        da[k] += model.head()(j, k) * dz[j];
      }
    for (std::size_t l = layers; l-- > 0;) {
      const auto& in = acts[l];
      std::vector<double> din(in.size(), 0.0);
      for (std::size_t i = 0; i < model.hidden()[l].weight.rows(); ++i) {
        if (!(acts[l + 1][i] > 0.0)) continue;
        gb[l][i] += da[i];
        for (std::size_t k = 0; k < in.size(); ++k) {
          gw[l](i, k) += da[i] * in[k];
          din[k] += model.hidden()[l].weight(i, k) * da[i];
        }
      }
      da = std::move(din);
    }
  }
  for (std::size_t l = 0; l < layers; ++l) {
    auto& layer = model.hidden()[l];
    for (std::size_t i = 0; i < layer.weight.size(); ++i) layer.weight.values()[i] -= lr * gw[l].values()[i];
    for (std::size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] -= lr * gb[l][i];
  }
  for (std::size_t i = 0; i < gh.size(); ++i) model.head().values()[i] -= lr * gh.values()[i];
}

/// Shuffled mini-batch plain CE SGD for `epochs_per_stage` epochs.
inline void plain_train(IncModel& model, const LabeledDataset& data, const ModelConfig& cfg,
                        SeededRng& rng) {
  std::vector<std::size_t> order(data.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs_per_stage; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      Matrix2D x(end - start, data.dim());
      std::vector<std::size_t> y;
      for (std::size_t i = start; i < end; ++i) {
        std::copy(data.sample(order[i]).begin(), data.sample(order[i]).end(), x.row(i - start).begin());
        y.push_back(data.labels()[order[i]]);
      }
      plain_ce_sgd_step(model, x, y, cfg.learning_rate);
    }
  }
}

/// Fine-tuning on new data only: expand the head, then plain_train.
/// Consumes `rng` the same way a stage update does.
inline IncModel plain_fine_tune(IncModel model, const LabeledDataset& data, std::size_t new_classes,
                                const ModelConfig& cfg, SeededRng& rng) {
  model.expand_head(new_classes, rng);
  plain_train(model, data, cfg, rng);
  return model;
}

/// Accuracy by explicit per-sample counting.
inline double count_accuracy(const IncModel& model, const LabeledDataset& data) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto e = embed(model, data.sample(i));
    std::size_t best = 0;
    double best_logit = -INFINITY;
    for (std::size_t j = 0; j < model.num_classes(); ++j) {
      double z = 0.0;
      for (std::size_t k = 0; k < e.size(); ++k) z += model.head()(j, k) * e[k];
      if (z > best_logit) {
        best_logit = z;
        best = j;
      }
    }
    hits += best == data.labels()[i];
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace inkrementa::oracle
