#include "lobster/dsp/scaler.hpp"

#include <cmath>
#include <string>

#include "lobster/common/error.hpp"
#include "lobster/common/json_arrays.hpp"

namespace lobster::dsp {

StandardScaler zscore_fit(const Matrix& features, double epsilon) {
  if (features.rows() < 2) throw ValidationError("z-score fit needs at least 2 rows");
  StandardScaler s;
  s.epsilon = epsilon;
  s.mean = features.colwise().mean().transpose();
  s.std.resize(features.cols());
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    const double var = (features.col(c).array() - s.mean(c)).square().mean();
    s.std(c) = std::sqrt(var);
  }
  return s;
}

Matrix zscore_apply(const StandardScaler& scaler, const Matrix& features) {
  if (features.cols() != scaler.dim()) {
    throw ValidationError("scaler expects " + std::to_string(scaler.dim()) + " columns, got " +
                          std::to_string(features.cols()));
  }
  Matrix out(features.rows(), features.cols());
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    if (scaler.is_constant(c)) {
      out.col(c).setZero();
    } else {
      out.col(c) = (features.col(c).array() - scaler.mean(c)) / scaler.std(c);
    }
  }
  return out;
}

Matrix zscore_inverse(const StandardScaler& scaler, const Matrix& standardized) {
  if (standardized.cols() != scaler.dim()) throw ValidationError("scaler dimension mismatch");
  Matrix out(standardized.rows(), standardized.cols());
  for (Eigen::Index c = 0; c < standardized.cols(); ++c) {
    if (scaler.is_constant(c)) {
      out.col(c).setConstant(scaler.mean(c));
    } else {
      out.col(c) = standardized.col(c).array() * scaler.std(c) + scaler.mean(c);
    }
  }
  return out;
}

nlohmann::json to_json(const StandardScaler& scaler) {
  return {{"version", StandardScaler::kVersion},
          {"mean", encode_vector(scaler.mean, ArrayEncoding::kDecimal)},
          {"std", encode_vector(scaler.std, ArrayEncoding::kDecimal)},
          {"epsilon", scaler.epsilon}};
}

StandardScaler scaler_from_json(const nlohmann::json& node) {
  if (node.at("version").get<int>() != StandardScaler::kVersion) {
    throw DataError("unsupported scaler version");
  }
  StandardScaler s;
  s.mean = decode_vector(node.at("mean"));
  s.std = decode_vector(node.at("std"));
  s.epsilon = node.at("epsilon").get<double>();
  if (s.mean.size() != s.std.size()) throw DataError("scaler mean/std length mismatch");
  return s;
}

}  // namespace lobster::dsp
