#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <cstddef>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "inkrementa/harness/runner.hpp"

namespace inkrementa {

/// One ablation arm: a name plus the stage-update switches it sets.
struct Variant {
  std::string name;
  bool use_exemplars = true;
  bool use_distillation = true;
  bool use_weight_align = true;
  DistillLoss distill_loss = DistillLoss::mse;
  NormKind wa_norm = NormKind::l2;

  CcsOptions apply(CcsOptions base) const {
    base.use_exemplars = use_exemplars;
    base.use_distillation = use_distillation;
    base.use_weight_align = use_weight_align;
    base.distill_loss = distill_loss;
    base.wa_norm = wa_norm;
    return base;
  }

  bool same_settings(const Variant& o) const {
    return use_exemplars == o.use_exemplars && use_distillation == o.use_distillation &&
           use_weight_align == o.use_weight_align && distill_loss == o.distill_loss &&
           wa_norm == o.wa_norm;
  }
};

/// Named presets: "components" (exemplars / distillation / aligning
/// combinations plus the fine-tuning baseline), "distill-loss", "wa-norm".
inline std::vector<Variant> preset_matrix(const std::string& name) {
  if (name == "components") {
    return {{"baseline", false, false, false},
            {"kd+wa", false, true, true},
            {"e", true, false, false},
            {"e+kd", true, true, false},
            {"e+wa", true, false, true},
            {"e+kd+wa", true, true, true}};
  }
  if (name == "distill-loss") {
    return {{"kld", true, true, true, DistillLoss::kld},
            {"l1", true, true, true, DistillLoss::l1},
            {"mse", true, true, true, DistillLoss::mse}};
  }
  if (name == "wa-norm") {
    return {{"l1-norm", true, true, true, DistillLoss::mse, NormKind::l1},
            {"l2-norm", true, true, true, DistillLoss::mse, NormKind::l2}};
  }
  throw ConfigError("unknown ablation matrix '" + name +
                    "' (expected components|distill-loss|wa-norm or a JSON file)");
}

/// Parses a JSON list of variant objects:
/// {"name", "use_exemplars", "use_distillation", "use_weight_align", "distill_loss", "wa_norm"}.
inline std::vector<Variant> variants_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw ConfigError("ablation matrix: expected a list of variants");
  std::vector<Variant> out;
  for (const auto& v : doc) {
    detail::require_object(v, "variant");
    detail::reject_unknown_keys(v,
                                {"name", "use_exemplars", "use_distillation", "use_weight_align",
                                 "distill_loss", "wa_norm"},
                                "variant");
    Variant var;
    var.name = detail::get_field<std::string>(v, "name", "variant", "");
    if (var.name.empty()) throw ConfigError("variant: 'name' is required");
    var.use_exemplars = detail::get_field<bool>(v, "use_exemplars", "variant", true);
    var.use_distillation = detail::get_field<bool>(v, "use_distillation", "variant", true);
    var.use_weight_align = detail::get_field<bool>(v, "use_weight_align", "variant", true);
    var.distill_loss = parse_distill_loss(detail::get_field<std::string>(v, "distill_loss", "variant", "mse"));
    var.wa_norm = parse_norm_kind(detail::get_field<std::string>(v, "wa_norm", "variant", "l2"));
    out.push_back(std::move(var));
  }
  return out;
}

struct AblationResult {
  std::vector<Variant> variants;  // after de-duplication
  std::vector<RunReport> runs;    // variant-major, seed-minor
  std::vector<ComparisonRow> table;
  std::vector<std::string> warnings;
};

/// Drops entries whose name or settings repeat an earlier entry.
inline std::vector<Variant> dedupe_variants(const std::vector<Variant>& matrix,
                                            std::vector<std::string>& warnings) {
  std::vector<Variant> out;
  for (const auto& v : matrix) {
    const auto dup = std::find_if(out.begin(), out.end(), [&](const Variant& kept) {
      return kept.name == v.name || kept.same_settings(v);
    });
    if (dup != out.end()) {
      warnings.push_back("variant '" + v.name + "' duplicates '" + dup->name + "'; skipped");
      continue;
    }
    out.push_back(v);
  }
  return out;
}

/// One run per (variant, seed). Runs are independent and execute on up to
/// `jobs` threads; results do not depend on the thread count.
inline AblationResult run_ablation(const ScenarioConfig& base, const std::vector<Variant>& matrix,
                                   std::size_t seeds = 3, std::size_t jobs = 0) {
  if (matrix.empty()) throw ArgumentError("ablation: empty variant matrix");
  if (seeds < 1) throw ArgumentError("ablation: seeds must be >= 1");
  base.validate();
  AblationResult out;
  out.variants = dedupe_variants(matrix, out.warnings);

  std::vector<ScenarioConfig> configs;
  std::vector<std::string> methods;
  for (const auto& v : out.variants) {
    for (std::size_t s = 0; s < seeds; ++s) {
      ScenarioConfig cfg = base;
      cfg.seed = base.seed + s;
      cfg.ccs = v.apply(base.ccs);
      configs.push_back(std::move(cfg));
      methods.push_back(v.name);
    }
  }
  out.runs.resize(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, configs.size());
  {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
          try {
            out.runs[i] = run_scenario(configs[i], methods[i]);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  out.table = compare_final_stages(out.runs);
  return out;
}

}  // namespace inkrementa
