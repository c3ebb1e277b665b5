#pragma once

#include <json.hpp>

#include "lobster/common/json_arrays.hpp"
#include "lobster/common/types.hpp"

namespace lobster::features {

/// Principal axes of a training matrix.
///
/// `components` is k x d with orthonormal rows ordered by decreasing
/// eigenvalue; each row's largest-magnitude entry is positive so serialised
/// models are reproducible. `explained_variance_ratio` is each eigenvalue
/// over the total variance, and `tev` their sum.
struct PcaModel {
  static constexpr int kVersion = 1;

  Vector mean;
  Matrix components;
  Vector explained_variance;
  Vector explained_variance_ratio;
  double tev = 0.0;
  /// Set when k exceeds the numerical rank; trailing ratios are then 0.
  bool rank_deficient = false;

  Eigen::Index input_dim() const { return mean.size(); }
  Eigen::Index n_components() const { return components.rows(); }
};

/// Eigendecomposition of the mean-centred sample covariance. Throws
/// ValidationError unless 1 <= k <= d and N > k.
PcaModel pca_fit(const Matrix& features, Eigen::Index k);

/// (X - mean) * components^T. Throws ValidationError on a dimension mismatch.
Matrix pca_transform(const PcaModel& model, const Matrix& features);
Matrix pca_inverse_transform(const PcaModel& model, const Matrix& projected);

nlohmann::json to_json(const PcaModel& model, ArrayEncoding encoding = ArrayEncoding::kDecimal);
PcaModel pca_from_json(const nlohmann::json& node);

}  // namespace lobster::features
