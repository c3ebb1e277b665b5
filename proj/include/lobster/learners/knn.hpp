#pragma once

#include <string>

#include "lobster/common/types.hpp"

namespace lobster::learners {

enum class KnnWeights { kUniform, kDistance };

struct KnnParams {
  int k = 5;
  /// Minkowski exponent, >= 1.
  double p = 2.0;
  KnnWeights weights = KnnWeights::kUniform;
  /// Recorded for provenance; every value runs exact brute-force search.
  std::string algorithm = "auto";
};

struct KnnModel {
  KnnParams params;
  Matrix X;
  Labels y;
};

void validate(const KnnParams& params);

/// Memorises the training set. Throws ValidationError when k > N.
KnnModel knn_fit(const Matrix& X, const Labels& y, const KnnParams& params);

/// Neighbour vote fractions. Equal distances are ordered by training-row index;
/// with distance weighting a zero-distance match takes all the weight.
Matrix knn_predict_proba(const KnnModel& model, const Matrix& X);

double minkowski(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, double p);

}  // namespace lobster::learners
