#pragma once

#include <cmath>

#include "lobster/common/types.hpp"

namespace lobster::learners {

/// Throws ValidationError unless X has rows, y matches, and labels are 0/1.
void check_training_set(const Matrix& X, const Labels& y);

/// Throws ValidationError unless both classes are present.
void check_two_classes(const Labels& y);

/// Throws ValidationError on an empty query or a column-count mismatch.
void check_query(const Matrix& X, Eigen::Index expected_dim);

/// N x 2 matrix [1 - p, p].
Matrix two_column(const Vector& positive);

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

/// Mean binary cross-entropy of raw margins against 0/1 targets.
double mean_log_loss_from_margin(const Vector& margin, const Labels& y);

}  // namespace lobster::learners
