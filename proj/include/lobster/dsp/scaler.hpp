#pragma once

#include <json.hpp>

#include "lobster/common/types.hpp"

namespace lobster::dsp {

/// Per-column z-score standardisation with population standard deviation.
/// Columns whose deviation falls below `epsilon` are constant and map to 0.
struct StandardScaler {
  static constexpr int kVersion = 1;
  static constexpr double kDefaultEpsilon = 1e-12;

  Vector mean;
  Vector std;
  double epsilon = kDefaultEpsilon;

  bool is_constant(Eigen::Index column) const { return std(column) < epsilon; }
  Eigen::Index dim() const { return mean.size(); }
};

/// Throws ValidationError when fewer than two rows are given.
StandardScaler zscore_fit(const Matrix& features,
                          double epsilon = StandardScaler::kDefaultEpsilon);
/// Throws ValidationError on a column-count mismatch.
Matrix zscore_apply(const StandardScaler& scaler, const Matrix& features);
/// Constant columns come back as their mean.
Matrix zscore_inverse(const StandardScaler& scaler, const Matrix& standardized);

nlohmann::json to_json(const StandardScaler& scaler);
StandardScaler scaler_from_json(const nlohmann::json& node);

}  // namespace lobster::dsp
