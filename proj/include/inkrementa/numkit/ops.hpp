#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inkrementa/error.hpp"

namespace inkrementa {

enum class NormKind { l1, l2 };

/// Floor applied to the second argument of kl_divergence.
inline constexpr double kKlFloor = 1e-12;

namespace detail {
inline void require_same_length(std::span<const double> a, std::span<const double> b,
                                std::string_view op) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(op) + ": length mismatch (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  }
}
}  // namespace detail

/// Numerically stable softmax (max-subtracted).
inline std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw EmptyInputError("softmax: empty logits");
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (auto& p : out) p /= total;
  return out;
}

/// -log softmax(logits)[label], evaluated as logsumexp - logit.
inline double cross_entropy(std::span<const double> logits, std::size_t label) {
  if (logits.empty()) throw EmptyInputError("cross_entropy: empty logits");
  if (label >= logits.size()) {
    throw IndexError("cross_entropy: label " + std::to_string(label) + " out of range for " +
                     std::to_string(logits.size()) + " logits");
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - peak);
  return std::max(0.0, std::log(total) + peak - logits[label]);
}

inline double mse(std::span<const double> a, std::span<const double> b) {
  detail::require_same_length(a, b, "mse");
  if (a.empty()) throw EmptyInputError("mse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

inline double l1_loss(std::span<const double> a, std::span<const double> b) {
  detail::require_same_length(a, b, "l1_loss");
  if (a.empty()) throw EmptyInputError("l1_loss: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

/// KL(p || q) = sum p ln(p / q); terms with p == 0 contribute 0 and q is floored at kKlFloor.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
  detail::require_same_length(p, q, "kl_divergence");
  if (p.empty()) throw EmptyInputError("kl_divergence: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    acc += p[i] * (std::log(p[i]) - std::log(std::max(q[i], kKlFloor)));
  }
  return acc;
}

inline double vec_norm(std::span<const double> v, NormKind kind) {
  if (v.empty()) throw EmptyInputError("vec_norm: empty vector");
  double acc = 0.0;
  if (kind == NormKind::l1) {
    for (double x : v) acc += std::abs(x);
    return acc;
  }
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

inline std::string_view to_string(NormKind kind) { return kind == NormKind::l1 ? "l1" : "l2"; }

inline NormKind parse_norm_kind(std::string_view text) {
  if (text == "l1") return NormKind::l1;
  if (text == "l2") return NormKind::l2;
  throw ConfigError("unknown norm kind '" + std::string(text) + "' (expected l1|l2)");
}

}  // namespace inkrementa
