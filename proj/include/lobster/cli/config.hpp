#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lobster/dsp/filter.hpp"
#include "lobster/dsp/snr.hpp"
#include "lobster/eval/ranking.hpp"
#include "lobster/features/mfcc.hpp"
#include "lobster/ingest/synthetic.hpp"
#include "lobster/learners/model.hpp"

namespace lobster::cli {

/// One entry of the model list: a report name, a pipeline and its candidates.
struct ModelEntry {
  std::string name;
  learners::Family family = learners::Family::kKnn;
  int pca_components = 0;
  bool standardize = true;
  /// Either {key: [values]} (cartesian) or a list of such objects.
  nlohmann::json grid = nlohmann::json::object();

  std::vector<learners::PipelineSpec> candidates() const;
};

struct EvaluationConfig {
  bool timing = true;
  int timing_warmup = 1;
  int timing_repeats = 30;
  int bootstrap = 2000;
  double confidence = 0.95;
  eval::TieRule tie_rule = eval::TieRule::kMidrankFloor;
  int calibration_bins = 10;
};

struct StackingConfig {
  std::vector<std::string> bases;
  int folds = 5;
  /// 0 picks the first entry of mfcc_dims.
  int mfcc = 0;
  std::string meta = "logreg";
};

struct RunConfig {
  /// Exactly one of these is set.
  std::optional<ingest::SyntheticSpec> synthetic;
  std::optional<std::filesystem::path> manifest;
  int sample_rate = kDefaultSampleRate;

  std::vector<Task> tasks = {Task::kAge, Task::kSex};
  /// Positive classes per task: "juvenile"/"adult" and "female"/"male".
  std::string positive_age = "juvenile";
  std::string positive_sex = "female";
  std::vector<int> mfcc_dims = {40, 50, 60};
  dsp::PreprocessConfig preprocessing;
  dsp::SnrPolicy snr;
  features::MfccConfig mfcc;

  double test_fraction = 0.2;
  std::uint64_t split_seed = 42;
  int folds = 5;
  std::vector<ModelEntry> models;
  EvaluationConfig evaluation;
  StackingConfig stacking;

  std::uint64_t seed = 42;
  int jobs = 1;
  std::filesystem::path out = "runs/default";

  const ModelEntry& model(const std::string& name) const;
  /// True when the configured positive class is Adult or Male, so labels are inverted.
  bool flips(Task task) const;
};

/// Built-in defaults: the synthetic dataset and the published grids.
nlohmann::json default_config_json();

/// Overlays `overrides` on the defaults, then validates. Unknown keys are
/// rejected with their full path, e.g. "evaluation.timng".
RunConfig parse_config(const nlohmann::json& overrides);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical echo of every resolved setting.
nlohmann::json to_json(const RunConfig& config);

/// hash(config, seed, code version) as 16 hex digits.
std::string run_id(const RunConfig& config);

inline constexpr const char* kCodeVersion = "0.1.0";

}  // namespace lobster::cli
