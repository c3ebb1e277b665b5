#include "lobster/dsp/snr.hpp"

#include <algorithm>
#include <cmath>

#include "lobster/common/error.hpp"

namespace lobster::dsp {

double rms_db(std::span<const double> samples) {
  if (samples.empty()) return -400.0;
  double energy = 0.0;
  for (double v : samples) energy += v * v;
  const double rms = std::sqrt(energy / static_cast<double>(samples.size()));
  return rms > 1e-20 ? 20.0 * std::log10(rms) : -400.0;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

SnrScreenResult snr_screen_with_floor(const std::vector<std::vector<double>>& segments,
                                      double floor_db, double threshold_db) {
  SnrScreenResult result;
  result.floor_db = floor_db;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (rms_db(segments[i]) - floor_db >= threshold_db) {
      result.kept.push_back(i);
    } else {
      result.discarded.push_back(i);
    }
  }
  return result;
}

SnrScreenResult snr_screen(const std::vector<std::vector<double>>& segments,
                           const SnrPolicy& policy) {
  if (segments.empty()) throw ValidationError("SNR screening needs at least one segment");
  if (!(policy.floor_percentile > 0.0 && policy.floor_percentile < 100.0)) {
    throw ValidationError("SNR floor percentile must lie in (0, 100)");
  }
  std::vector<double> levels;
  levels.reserve(segments.size());
  for (const auto& s : segments) levels.push_back(rms_db(s));
  return snr_screen_with_floor(segments, percentile(levels, policy.floor_percentile),
                               policy.threshold_db);
}

nlohmann::json to_json(const SnrPolicy& policy) {
  return {{"threshold_db", policy.threshold_db}, {"floor_percentile", policy.floor_percentile}};
}

}  // namespace lobster::dsp
