#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lobster/common/types.hpp"

namespace lobster::eval {

struct TimingReport {
  /// Per-sample milliseconds: batch wall time / N for each repeat.
  std::vector<double> per_sample_ms;
  double median_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
  double iqr_ms = 0.0;
  int warmup = 0;
  int repeats = 0;
  std::size_t n_samples = 0;
  std::string cpu_model;
  unsigned cores = 0;
  double timer_resolution_ms = 0.0;
  /// Set when a batch ran for fewer than 100 timer ticks.
  bool coarse_timer = false;
};

/// Times `predict` on the whole batch. Requires repeats >= 5 and warmup >= 1.
TimingReport measure_inference_time(const std::function<void(const Matrix&)>& predict, const Matrix& X,
                                    int warmup = 1, int repeats = 30);

/// Smallest observable steady_clock increment, in milliseconds.
double timer_resolution_ms();

/// "model name" from /proc/cpuinfo, or "unknown".
std::string cpu_model_name();

nlohmann::json to_json(const TimingReport& report);

}  // namespace lobster::eval
