#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

namespace lobster::dsp {

/// Keep a segment when its RMS level clears the dataset noise floor by at
/// least `threshold_db`. The floor is the `floor_percentile`-th percentile of
/// per-segment RMS levels (linear interpolation between order statistics).
struct SnrPolicy {
  double threshold_db = 6.0;
  double floor_percentile = 10.0;
};

struct SnrScreenResult {
  /// Indices into the screened list, in input order.
  std::vector<std::size_t> kept;
  std::vector<std::size_t> discarded;
  double floor_db = 0.0;
};

/// 20 log10(rms), with silence mapped to -400 dB.
double rms_db(std::span<const double> samples);

/// Percentile with linear interpolation, p in [0, 100].
double percentile(std::vector<double> values, double p);

/// Throws ValidationError for empty input or a percentile outside (0, 100).
SnrScreenResult snr_screen(const std::vector<std::vector<double>>& segments,
                           const SnrPolicy& policy);

/// Screens against an already fitted floor.
SnrScreenResult snr_screen_with_floor(const std::vector<std::vector<double>>& segments,
                                      double floor_db, double threshold_db);

nlohmann::json to_json(const SnrPolicy& policy);

}  // namespace lobster::dsp
