// inkrementa: class-incremental learning experiments from the command line.
//
//   inkrementa gen-data --config scenario.json --out data/
//   inkrementa run      --config scenario.json --seeds 3 --out runs/
//   inkrementa ablate   --config scenario.json --matrix components --out ablation/
//   inkrementa report   --out summary.csv runs/*.json

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "inkrementa/inkrementa.hpp"

namespace fs = std::filesystem;
using namespace inkrementa;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::size_t seeds = 1;
};

ScenarioConfig resolve_config(const CommonArgs& args) {
  ScenarioConfig cfg =
      args.config_path.empty() ? default_scenario() : load_scenario(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  cfg.output_dir = args.out;
  if (args.seeds < 1) throw ConfigError("--seeds must be >= 1");
  return cfg;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

void print_stage_table(const RunReport& r) {
  std::printf("%s\n  stage    N  accuracy      ACCN  ideal\n", r.run_id.c_str());
  for (const auto& s : r.stages) {
    std::printf("  %5zu %4zu  %8.4f  %8.4f  %5zu\n", s.stage, s.num_classes, s.accuracy, s.accn,
                s.num_classes);
  }
}

int cmd_gen_data(const CommonArgs& args) {
  const auto cfg = resolve_config(args);
  const auto* syn = std::get_if<SyntheticSource>(&cfg.data);
  if (syn == nullptr) throw ConfigError("gen-data needs a synthetic data source");
  ensure_dir(cfg.output_dir);
  const auto data = generate_synthetic(syn->spec(cfg.seed));
  write_csv((fs::path(cfg.output_dir) / "train.csv").string(), data.train);
  write_csv((fs::path(cfg.output_dir) / "test.csv").string(), data.test);
  std::printf("wrote %zu train and %zu test rows to %s\n", data.train.size(), data.test.size(),
              cfg.output_dir.c_str());
  return 0;
}

int cmd_run(const CommonArgs& args, bool keep_model) {
  auto cfg = resolve_config(args);
  ensure_dir(cfg.output_dir);
  std::vector<RunReport> runs;
  const auto base = cfg.seed;
  for (std::size_t s = 0; s < args.seeds; ++s) {
    cfg.seed = base + s;
    IncModel model;
    runs.push_back(run_scenario(cfg, "ccs", &model));
    const auto& r = runs.back();
    write_run_report(r, (fs::path(cfg.output_dir) / (r.run_id + ".json")).string());
    if (keep_model) save_model(model, (fs::path(cfg.output_dir) / (r.run_id + ".model.json")).string());
    print_stage_table(r);
  }
  write_text_file((fs::path(cfg.output_dir) / "summary.csv").string(), summary_csv(runs));
  write_text_file((fs::path(cfg.output_dir) / "timings.csv").string(), timings_csv(runs));
  return 0;
}

int cmd_ablate(const CommonArgs& args, const std::string& matrix_arg, std::size_t jobs) {
  const auto cfg = resolve_config(args);
  std::vector<Variant> matrix;
  if (fs::exists(matrix_arg)) {
    std::ifstream in(matrix_arg);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("matrix file '" + matrix_arg + "': " + e.what());
    }
    matrix = variants_from_json(doc);
  } else {
    matrix = preset_matrix(matrix_arg);
  }
  ensure_dir(cfg.output_dir);
  const auto result = run_ablation(cfg, matrix, args.seeds, jobs);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& r : result.runs)
    write_run_report(r, (fs::path(cfg.output_dir) / (r.run_id + ".json")).string());
  write_text_file((fs::path(cfg.output_dir) / "summary.csv").string(), summary_csv(result.runs));
  write_text_file((fs::path(cfg.output_dir) / "timings.csv").string(), timings_csv(result.runs));
  std::printf("%-12s %5s %4s  %-17s  %-17s\n", "variant", "stage", "N", "accuracy", "ACCN");
  for (const auto& row : result.table) {
    std::printf("%-12s %5zu %4zu  %.4f +- %.4f  %7.4f +- %.4f\n", row.method.c_str(), row.stage,
                row.num_classes, row.accuracy_mean, row.accuracy_std, row.accn_mean, row.accn_std);
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
  if (inputs.empty()) throw ConfigError("report: no run reports given");
  std::vector<RunReport> runs;
  for (const auto& path : inputs) runs.push_back(read_run_report(path));
  const auto csv = summary_csv(runs);
  if (out == "-") {
    std::cout << csv;
  } else {
    write_text_file(out, csv);
  }
  return 0;
}

int exit_code_for(const Error& e) {
  switch (e.category()) {
    case Error::Category::config: return kExitConfig;
    case Error::Category::data: return kExitData;
    case Error::Category::runtime: return kExitRuntime;
  }
  return kExitRuntime;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool with_seeds) {
  cmd->add_option("--config", args.config_path, "Scenario JSON (default: built-in synthetic scenario)");
  cmd->add_option("--seed", args.seed, "Override the config seed");
  cmd->add_option("--out", args.out, "Output directory")->capture_default_str();
  if (with_seeds) {
    cmd->add_option("--seeds", args.seeds, "Number of consecutive seeds to run")->capture_default_str();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"inkrementa: class-incremental learning with exemplar replay, distillation and weight aligning"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  CommonArgs gen_args, run_args, ablate_args;
  auto* gen = app.add_subcommand("gen-data", "Write synthetic train/test CSVs");
  add_common(gen, gen_args, false);

  auto* run = app.add_subcommand("run", "Run one scenario (per seed)");
  add_common(run, run_args, true);
  bool save_model = false;
  run->add_flag("--save-model", save_model, "Also write the final model of each seed");

  auto* ablate = app.add_subcommand("ablate", "Run a variant matrix");
  ablate_args.seeds = 3;
  add_common(ablate, ablate_args, true);
  std::string matrix = "components";
  std::size_t jobs = 0;
  ablate->add_option("--matrix", matrix, "components | distill-loss | wa-norm | path to JSON list")
      ->capture_default_str();
  ablate->add_option("--jobs", jobs, "Worker threads (0 = hardware concurrency)");

  auto* report = app.add_subcommand("report", "Merge run JSONs into one comparison CSV");
  std::vector<std::string> inputs;
  std::string report_out = "-";
  report->add_option("inputs", inputs, "Run report JSON files")->required();
  report->add_option("--out", report_out, "CSV path ('-' for stdout)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) return cmd_gen_data(gen_args);
    if (*run) return cmd_run(run_args, save_model);
    if (*ablate) return cmd_ablate(ablate_args, matrix, jobs);
    if (*report) return cmd_report(inputs, report_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
