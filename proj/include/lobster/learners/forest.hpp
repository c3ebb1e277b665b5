#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lobster/learners/tree.hpp"

namespace lobster::learners {

struct RfParams {
  int n_estimators = 100;
  std::optional<int> max_depth;
  int min_samples_leaf = 1;
  int min_samples_split = 2;
  /// "sqrt", "all", or a positive integer as text.
  std::string max_features = "sqrt";
  bool bootstrap = true;
};

struct RfModel {
  RfParams params;
  Eigen::Index n_features = 0;
  std::vector<DecisionTree> trees;
};

void validate(const RfParams& params);
int resolve_max_features(const std::string& spec, Eigen::Index d);

/// Tree t draws its bootstrap sample and feature subsets from stream t of
/// `seed`, so the forest is identical regardless of how trees are scheduled.
RfModel rf_fit(const Matrix& X, const Labels& y, const RfParams& params, std::uint64_t seed,
               int jobs = 1);
Matrix rf_predict_proba(const RfModel& model, const Matrix& X);

struct GbtParams {
  int n_estimators = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  double subsample = 1.0;
  double colsample_bytree = 1.0;
  double reg_lambda = 1.0;
  double min_child_weight = 1.0;
  /// Newton leaves use the logistic hessian; off fits unit-hessian leaves.
  bool newton_leaves = true;
};

struct GbtModel {
  GbtParams params;
  Eigen::Index n_features = 0;
  /// Initial margin: prior log-odds of the training labels.
  double base_margin = 0.0;
  std::vector<DecisionTree> trees;
  /// Training log-loss after each stage (index 0 is the prior-only model).
  std::vector<double> train_loss;
};

void validate(const GbtParams& params);

GbtModel gbt_fit(const Matrix& X, const Labels& y, const GbtParams& params, std::uint64_t seed);
Vector gbt_margin(const GbtModel& model, const Matrix& X);
Matrix gbt_predict_proba(const GbtModel& model, const Matrix& X);

}  // namespace lobster::learners
