#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lobster/common/types.hpp"
#include "lobster/eval/metrics.hpp"
#include "lobster/learners/model.hpp"

namespace lobster::eval {

/// A trained base learner: P(class 1) per row plus an optional parameter
/// snapshot used by leakage audits.
struct FittedLearner {
  std::function<Vector(const Matrix&)> predict_p1;
  nlohmann::json state;
};

using FitFn = std::function<FittedLearner(const Matrix& X, const Labels& y, std::uint64_t seed)>;

struct BaseLearner {
  std::string id;
  /// Fits the learner's whole preprocessing + model chain on the rows given.
  FitFn fit;
};

/// Wraps fit_model; the scaler and PCA are refit on every call.
BaseLearner pipeline_learner(const std::string& id, const learners::PipelineSpec& spec, int jobs = 1);

/// Out-of-fold probabilities, columns [P0, P1] for each base learner in order.
struct OofMatrix {
  Matrix rows;
  std::vector<std::string> learner_ids;
  std::vector<int> fold_of;
  int K = 0;

  /// logit(P1) of every learner, the meta-learner's inputs.
  Matrix meta_features() const;
};

enum class MetaKind {
  /// L2 logistic regression with cross-validated strength.
  kLogReg,
  /// sigmoid(mean base logit); with a single learner the stack reproduces it.
  kIdentity,
};

struct StackOptions {
  int K = 5;
  MetaKind meta = MetaKind::kLogReg;
  /// Keep the per-fold learners (fold_models[f][b]) for audits.
  bool keep_fold_models = false;
  /// Row groups; when given, folds deal whole individuals.
  const std::vector<std::string>* groups = nullptr;
};

struct StackedModel {
  std::vector<std::string> learner_ids;
  std::vector<FittedLearner> bases;
  OofMatrix oof;
  MetaKind meta = MetaKind::kLogReg;
  learners::LogRegModel meta_model;
  std::vector<std::vector<FittedLearner>> fold_models;

  /// n x B matrix of base P1 on new rows.
  Matrix base_probabilities(const Matrix& X) const;
  Vector predict_p1(const Matrix& X) const;
  Vector meta_p1(const Matrix& base_p1) const;
  Labels predict(const Matrix& X) const;
};

/// Rows whose logits are clipped to [1e-7, 1 - 1e-7] before the logit.
Matrix logit_columns(const Matrix& p1);

/// Requires at least one base learner; two or more are the normal case. A
/// base-learner failure is rethrown with the fold and learner id prepended.
StackedModel stack_fit(const std::vector<BaseLearner>& bases, const Matrix& X, const Labels& y,
                       const StackOptions& options, std::uint64_t seed);

/// MetricRows named "average", "majority_vote" and "stacked" on one test set.
/// Majority ties fall back to the averaged probability.
std::vector<MetricRow> stacking_ablation(const StackedModel& model, const Matrix& X_test,
                                         const Labels& y_test, int mfcc = 0);

}  // namespace lobster::eval
