#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "inkrementa/continual/stage_update.hpp"
#include "inkrementa/data/csv.hpp"
#include "inkrementa/data/stage_plan.hpp"
#include "inkrementa/data/synthetic.hpp"
#include "inkrementa/harness/config.hpp"
#include "inkrementa/harness/metrics.hpp"
#include "inkrementa/harness/report.hpp"

namespace inkrementa {

/// Seed offset separating the training stream from the data-generation stream.
inline constexpr std::uint64_t kTrainStreamOffset = 0x9e3779b97f4a7c15ULL;

/// True when the first non-blank line does not start with an integer label.
inline bool csv_has_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file '" + path + "'");
  std::string line;
  while (std::getline(in, line)) {
    const auto content = detail::trim(line);
    if (content.empty()) continue;
    const auto cell = detail::split_commas(content).front();
    unsigned long long label = 0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
    return ec != std::errc() || p != cell.data() + cell.size();
  }
  return false;
}

/// Loads or generates the data, splits it by stage and standardizes every
/// split with statistics of the base-stage training pool.
inline StageSplit prepare_stages(const ScenarioConfig& cfg) {
  TrainTestPair raw;
  if (const auto* syn = std::get_if<SyntheticSource>(&cfg.data)) {
    raw = generate_synthetic(syn->spec(cfg.seed));
  } else {
    const auto& csv = std::get<CsvSource>(cfg.data);
    raw.train = load_csv(csv.train, csv_has_header(csv.train));
    raw.test = load_csv(csv.test, csv_has_header(csv.test));
    if (raw.train.empty()) throw ParseError("training CSV '" + csv.train + "' has no rows");
    if (!raw.test.empty() && raw.test.dim() != raw.train.dim()) {
      throw ParseError("train and test CSV feature dimensions differ");
    }
  }
  auto split = split_stages(raw.train, raw.test, cfg.plan);
  const auto scaler = Standardizer::fit(split.stages.front().train);
  for (auto& stage : split.stages) {
    stage.train = scaler.apply(stage.train);
    stage.test = scaler.apply(stage.test);
  }
  return split;
}

/// Runs every stage of the scenario: base training on group 0, then one
/// stage update per later group, evaluating on all groups seen so far.
/// When `final_model` is non-null it receives the last stage's model.
inline RunReport run_scenario(const ScenarioConfig& cfg, const std::string& method = "ccs",
                              IncModel* final_model = nullptr) {
  cfg.validate();
  const auto split = prepare_stages(cfg);
  ModelConfig model_cfg = cfg.model;
  model_cfg.input_dim = split.stages.front().train.dim();
  model_cfg.validate();

  RunReport report;
  report.method = method;
  report.seed = cfg.seed;
  report.run_id = method + "-seed" + std::to_string(cfg.seed);
  report.config = scenario_to_json(cfg);

  SeededRng rng(cfg.seed + kTrainStreamOffset);
  IncModel model;
  ExemplarStore store(cfg.ccs.k);
  std::vector<GroupTestSet> seen_tests;

  for (std::size_t i = 0; i < split.stages.size(); ++i) {
    const auto& stage = split.stages[i];
    const auto started = std::chrono::steady_clock::now();
    StageReport sr;
    sr.stage = i;
    sr.new_classes = stage.original_classes.size();
    try {
      if (i == 0) {
        model = IncModel::init(model_cfg, sr.new_classes, rng);
        sr.epoch_loss =
            train_epochs(model, stage.train, nullptr, 0.0, DistillLoss::mse, model_cfg, rng);
        store = build_exemplar_store(model, stage.train, cfg.ccs.k);
      } else {
        const auto ctx = StageContext::make(model.num_classes(), sr.new_classes, cfg.ccs);
        sr.alpha = ctx.effective_alpha();
        auto result = ccs_stage_update(model, stage.train, store, ctx, model_cfg, rng);
        model = std::move(result.model);
        store = std::move(result.store);
        sr.epoch_loss = std::move(result.epoch_losses);
        sr.wa_gamma = result.wa_gamma;
      }
      seen_tests.push_back({i, stage.test});
      const auto eval = evaluate(model, seen_tests);
      sr.num_classes = model.num_classes();
      sr.accuracy = eval.accuracy;
      sr.group_accuracy = eval.group_accuracy;
      sr.accn = accn(sr.num_classes, sr.accuracy);
      sr.ideal_accn = static_cast<double>(sr.num_classes);
      sr.exemplars = store.size();
    } catch (const Error& e) {
      throw Error("stage " + std::to_string(i) + ": " + e.what(), e.category());
    }
    sr.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    report.stages.push_back(std::move(sr));
  }
  if (final_model != nullptr) *final_model = std::move(model);
  return report;
}

/// Runs seeds base, base+1, ..., base+n-1.
inline std::vector<RunReport> run_seeds(ScenarioConfig cfg, std::size_t n,
                                        const std::string& method = "ccs") {
  std::vector<RunReport> out;
  const auto base = cfg.seed;
  for (std::size_t s = 0; s < n; ++s) {
    cfg.seed = base + s;
    out.push_back(run_scenario(cfg, method));
  }
  return out;
}

/// Per-stage wall-clock timings (kept apart from the deterministic report).
inline std::string timings_csv(const std::vector<RunReport>& runs) {
  std::ostringstream out;
  out << "run_id,stage,wall_seconds\n";
  char buf[32];
  for (const auto& r : runs)
    for (const auto& s : r.stages) {
      std::snprintf(buf, sizeof buf, "%.3f", s.wall_seconds);
      out << r.run_id << ',' << s.stage << ',' << buf << '\n';
    }
  return out.str();
}

}  // namespace inkrementa
