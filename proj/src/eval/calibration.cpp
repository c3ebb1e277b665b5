#include "lobster/eval/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "lobster/common/error.hpp"

namespace lobster::eval {

CalibrationReport calibration_report(std::span<const double> p, const Labels& y, int n_bins) {
  if (n_bins < 2) throw ValidationError("calibration needs at least 2 bins");
  if (p.size() != y.size()) throw ValidationError("probability and label lengths differ");
  if (p.empty()) throw ValidationError("calibration needs at least one prediction");
  CalibrationReport r;
  r.bins.resize(static_cast<std::size_t>(n_bins));
  std::vector<double> sum_p(r.bins.size(), 0.0), sum_y(r.bins.size(), 0.0);
  for (int b = 0; b < n_bins; ++b) {
    r.bins[static_cast<std::size_t>(b)].lo = static_cast<double>(b) / n_bins;
    r.bins[static_cast<std::size_t>(b)].hi = static_cast<double>(b + 1) / n_bins;
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) throw ValidationError("probabilities must lie in [0, 1]");
    const auto b = std::min<std::size_t>(static_cast<std::size_t>(p[i] * n_bins), r.bins.size() - 1);
    r.bins[b].count += 1;
    sum_p[b] += p[i];
    sum_y[b] += y[i];
    sq += (p[i] - y[i]) * (p[i] - y[i]);
  }
  for (std::size_t b = 0; b < r.bins.size(); ++b) {
    if (r.bins[b].count == 0) continue;
    const auto c = static_cast<double>(r.bins[b].count);
    r.bins[b].mean_predicted = sum_p[b] / c;
    r.bins[b].empirical_rate = sum_y[b] / c;
  }
  r.brier = sq / static_cast<double>(p.size());
  return r;
}

nlohmann::json to_json(const CalibrationReport& report) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : report.bins) {
    bins.push_back({{"lo", b.lo},
                    {"hi", b.hi},
                    {"count", b.count},
                    {"mean_predicted", b.mean_predicted ? nlohmann::json(*b.mean_predicted) : nlohmann::json(nullptr)},
                    {"empirical_rate", b.empirical_rate ? nlohmann::json(*b.empirical_rate) : nlohmann::json(nullptr)}});
  }
  return {{"brier", report.brier}, {"bins", bins}};
}

}  // namespace lobster::eval
