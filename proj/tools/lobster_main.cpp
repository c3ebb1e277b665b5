// lobster: batch command-line front end for the acoustic classification pipeline.
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>

#include "lobster/cli/commands.hpp"
#include "lobster/cli/config.hpp"
#include "lobster/common/error.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> jobs;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run config; omitted keys take the built-in defaults");
  cmd->add_option("--seed", f.seed, "Master seed (overrides the config file)");
  cmd->add_option("--out", f.out, "Output directory (overrides the config file)");
  cmd->add_option("--jobs", f.jobs, "Worker threads for grid cells, folds and forests")->check(CLI::PositiveNumber);
}

lobster::cli::RunConfig resolve(const Flags& f) {
  auto c = f.config.empty() ? lobster::cli::parse_config(nlohmann::json::object()) : lobster::cli::load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (!f.out.empty()) c.out = f.out;
  if (f.jobs) c.jobs = *f.jobs;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lobster bioacoustic classification toolkit"};
  app.require_subcommand(1);
  Flags flags;

  auto* synth = app.add_subcommand("synth", "Generate the synthetic dataset (WAV files + manifest)");
  auto* feats = app.add_subcommand("features", "Filter, SNR-screen and extract pooled MFCCs per dimension");
  auto* train = app.add_subcommand("train", "Grid-search every model on the training individuals and refit the winner");
  auto* evaluate = app.add_subcommand("evaluate", "Score trained models on held-out individuals; stats and rank tables");
  auto* stack = app.add_subcommand("stack", "Out-of-fold stacking ensemble with average / majority / stacked ablation");
  auto* bench = app.add_subcommand("bench", "Per-sample inference time of every trained model");
  auto* pipeline = app.add_subcommand("pipeline", "synth (if synthetic), features, train, evaluate");
  for (auto* c : {synth, feats, train, evaluate, stack, bench, pipeline}) add_common(c, flags);

  auto* defaults = app.add_subcommand("default-config", "Print the built-in config (published grids, synthetic dataset)");

  auto* ranks = app.add_subcommand("reproduce-ranks", "Rebuild the four published rank tables from the metric fixtures");
  std::string fixtures = "fixtures";
  std::string tie_rule = "midrank_floor";
  ranks->add_option("--fixtures", fixtures, "Directory holding <table>_metrics/_selection/_ranks.csv");
  ranks->add_option("--tie-rule", tie_rule, "midrank_floor, min or average");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    lobster::cli::Logger log;
    if (defaults->parsed()) {
      std::cout << lobster::cli::default_config_json().dump(2) << '\n';
      return 0;
    }
    if (ranks->parsed()) {
      const auto res = lobster::cli::reproduce_ranks(fixtures, lobster::eval::parse_tie_rule(tie_rule));
      for (const auto& name : res.tables) {
        std::cout << "== " << name << " ==\n" << lobster::eval::format_rank_table(res.computed.at(name)) << '\n';
      }
      for (const auto& m : res.mismatches) std::cerr << "mismatch " << m << '\n';
      log.event("reproduce_ranks", {{"tables", std::to_string(res.tables.size())},
                                    {"mismatches", std::to_string(res.mismatches.size())}});
      return res.mismatches.empty() ? 0 : static_cast<int>(lobster::ErrorKind::kData);
    }
    const auto config = resolve(flags);
    if (synth->parsed()) lobster::cli::cmd_synth(config, log);
    if (feats->parsed()) lobster::cli::cmd_features(config, log);
    if (train->parsed()) lobster::cli::cmd_train(config, log);
    if (evaluate->parsed()) lobster::cli::cmd_evaluate(config, log);
    if (stack->parsed()) lobster::cli::cmd_stack(config, log);
    if (bench->parsed()) lobster::cli::cmd_bench(config, log);
    if (pipeline->parsed()) lobster::cli::cmd_pipeline(config, log);
    return 0;
  } catch (const lobster::Error& e) {
    std::cerr << "error=" << e.what() << '\n';
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error=" << e.what() << '\n';
    return static_cast<int>(lobster::ErrorKind::kData);
  } catch (const std::exception& e) {
    std::cerr << "error=" << e.what() << '\n';
    return static_cast<int>(lobster::ErrorKind::kConvergence);
  }
}
