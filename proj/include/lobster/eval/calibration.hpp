#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "lobster/common/types.hpp"

namespace lobster::eval {

struct CalibrationBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  /// Both empty when the bin holds no predictions.
  std::optional<double> mean_predicted;
  std::optional<double> empirical_rate;
};

struct CalibrationReport {
  std::vector<CalibrationBin> bins;
  double brier = 0.0;
};

/// Equal-width bins on [0, 1]; p == 1 falls in the last bin.
CalibrationReport calibration_report(std::span<const double> probabilities, const Labels& y_true,
                                     int n_bins = 10);

nlohmann::json to_json(const CalibrationReport& report);

}  // namespace lobster::eval
