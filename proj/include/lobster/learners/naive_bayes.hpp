#pragma once

#include "lobster/common/types.hpp"

namespace lobster::learners {

struct GaussianNbParams {
  /// Added to every variance, scaled by the largest feature variance.
  double var_smoothing = 1e-9;
};

struct GaussianNbModel {
  GaussianNbParams params;
  /// Row c holds class-c statistics.
  Matrix means;
  Matrix variances;
  Vector log_prior;
  double epsilon = 0.0;
};

void validate(const GaussianNbParams& params);

/// Throws ValidationError when a class has fewer than two rows.
GaussianNbModel gaussian_nb_fit(const Matrix& X, const Labels& y, const GaussianNbParams& params);
Matrix gaussian_nb_predict_proba(const GaussianNbModel& model, const Matrix& X);

/// Unnormalised log joint log p(c) + sum_j log N(x_j | mu_cj, var_cj), N x 2.
Matrix gaussian_nb_log_joint(const GaussianNbModel& model, const Matrix& X);

}  // namespace lobster::learners
