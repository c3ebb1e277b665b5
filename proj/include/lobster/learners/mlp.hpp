#pragma once

#include <cstdint>
#include <vector>

#include "lobster/common/types.hpp"

namespace lobster::learners {

enum class Activation { kRelu, kTanh };

struct MlpParams {
  int hidden_units = 100;
  Activation activation = Activation::kRelu;
  /// L2 penalty on the weight matrices (biases are not penalised).
  double alpha = 1e-4;
  double learning_rate = 1e-3;
  int batch_size = 200;
  int max_epochs = 200;
  bool early_stopping = true;
  double validation_fraction = 0.1;
  int patience = 5;
};

/// Flat parameters laid out as W1 (d x h, column-major), b1 (h), w2 (h), b2.
struct MlpModel {
  MlpParams params;
  Eigen::Index n_features = 0;
  Vector theta;
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = 0;

  Eigen::Index n_params() const { return n_features * params.hidden_units + 2 * params.hidden_units + 1; }
};

void validate(const MlpParams& params);

/// Mean binary cross-entropy plus alpha/2 * (||W1||^2 + ||w2||^2).
double mlp_loss_and_gradient(const MlpModel& model, const Matrix& X, const Labels& y,
                             Vector* grad);

/// Glorot-uniform weights, zero biases.
MlpModel mlp_init(const MlpParams& params, Eigen::Index n_features, std::uint64_t seed);

MlpModel mlp_fit(const Matrix& X, const Labels& y, const MlpParams& params, std::uint64_t seed);
Matrix mlp_predict_proba(const MlpModel& model, const Matrix& X);

struct LogRegParams {
  /// lambda in mean log-loss + lambda/2 ||w||^2; the intercept is unpenalised.
  double l2_strength = 1.0;
  double tol = 1e-8;
  int max_iter = 200;
};

struct LogRegModel {
  LogRegParams params;
  Vector weights;
  double intercept = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
};

void validate(const LogRegParams& params);

/// Objective value and gradient (weights then intercept).
double logreg_objective(const Vector& weights, double intercept, const Matrix& X,
                        const Labels& y, double l2, Vector* grad);

/// Damped Newton until the gradient infinity-norm drops below params.tol.
/// Throws ConvergenceError at the iteration cap.
LogRegModel logreg_fit(const Matrix& X, const Labels& y, const LogRegParams& params);
Matrix logreg_predict_proba(const LogRegModel& model, const Matrix& X);

/// Picks the strength with the lowest held-out log-loss over stratified
/// folds, then refits on everything. Ties go to the stronger penalty.
LogRegModel logreg_fit_cv(const Matrix& X, const Labels& y, const std::vector<double>& strengths,
                          int folds, std::uint64_t seed);

std::vector<double> default_l2_grid();

}  // namespace lobster::learners
