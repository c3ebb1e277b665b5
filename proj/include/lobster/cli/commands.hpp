#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lobster/cli/config.hpp"
#include "lobster/eval/metrics.hpp"
#include "lobster/eval/ranking.hpp"
#include "lobster/features/feature_matrix.hpp"

namespace lobster::cli {

/// key=value log lines, echoed to a stream as they happen and kept for the
/// run's log artifact.
class Logger {
 public:
  explicit Logger(bool echo = true) : echo_(echo) {}
  void event(const std::string& name, const std::vector<std::pair<std::string, std::string>>& fields = {});
  const std::vector<std::string>& lines() const { return lines_; }

 private:
  bool echo_;
  std::vector<std::string> lines_;
};

/// Every file a command produces goes through here: atomic rename, and a
/// content hash recorded for the run manifest.
class ArtifactWriter {
 public:
  ArtifactWriter(std::filesystem::path root, std::string command, const RunConfig& config);
  void write(const std::string& relpath, const std::string& contents);
  void write(const std::string& relpath, const std::vector<std::uint8_t>& contents);
  /// Writes logs/<command>.log and runs/<command>.json.
  void finish(const Logger& log);
  const std::filesystem::path& root() const { return root_; }
  const std::map<std::string, std::string>& artifacts() const { return hashes_; }

 private:
  std::filesystem::path root_;
  std::string command_;
  nlohmann::json config_;
  std::string run_id_;
  std::map<std::string, std::string> hashes_;
};

/// Feature matrix of one (task, dim) plus the per-row individual labels.
struct LoadedFeatures {
  features::FeatureMatrix matrix;
  std::vector<ingest::IndividualLabels> row_labels;
};

std::string feature_file_name(Task task, int dim);
std::string model_slug(const std::string& name);
LoadedFeatures load_task_features(const std::filesystem::path& out, Task task, int dim);

struct TaskMetrics {
  Task task;
  std::vector<eval::MetricRow> rows;
  std::vector<eval::RankRow> ranks;
};

struct ReproduceResult {
  std::vector<std::string> tables;
  std::vector<std::string> mismatches;
  std::map<std::string, std::vector<eval::RankRow>> computed;
};

void cmd_synth(const RunConfig& config, Logger& log);
void cmd_features(const RunConfig& config, Logger& log);
void cmd_train(const RunConfig& config, Logger& log);
std::vector<TaskMetrics> cmd_evaluate(const RunConfig& config, Logger& log);
/// Ablation rows per task: each base learner, then average, majority_vote, stacked.
std::map<Task, std::vector<eval::MetricRow>> cmd_stack(const RunConfig& config, Logger& log);
nlohmann::json cmd_bench(const RunConfig& config, Logger& log);
/// synth (synthetic datasets only), features, train, evaluate.
std::vector<TaskMetrics> cmd_pipeline(const RunConfig& config, Logger& log);

/// Table names shipped as fixtures.
inline const std::vector<std::string> kRankTables = {"ml_avj", "dl_avj", "ml_mf", "dl_mf"};

/// Reads <name>_metrics.csv, <name>_selection.csv and <name>_ranks.csv for
/// each table and compares every computed cell with the expected one.
/// Throws DataError on a missing or malformed fixture.
ReproduceResult reproduce_ranks(const std::filesystem::path& fixtures, eval::TieRule rule = eval::TieRule::kMidrankFloor);

/// Picks (model, mfcc) rows listed in a `model,mfcc` selection CSV.
std::vector<eval::MetricRow> select_rows(const std::vector<eval::MetricRow>& rows, const std::string& selection_csv);

}  // namespace lobster::cli
