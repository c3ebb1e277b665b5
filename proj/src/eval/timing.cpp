#include "lobster/eval/timing.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <thread>

#include "lobster/common/error.hpp"
#include "lobster/eval/stats.hpp"

namespace lobster::eval {

double timer_resolution_ms() {
  using clock = std::chrono::steady_clock;
  double best = 1e9;
  for (int i = 0; i < 20; ++i) {
    const auto t0 = clock::now();
    auto t1 = clock::now();
    while (t1 == t0) t1 = clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

std::string cpu_model_name() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        auto start = line.find_first_not_of(" \t", colon + 1);
        return start == std::string::npos ? "unknown" : line.substr(start);
      }
    }
  }
  return "unknown";
}

TimingReport measure_inference_time(const std::function<void(const Matrix&)>& predict, const Matrix& X,
                                    int warmup, int repeats) {
  if (repeats < 5) throw ValidationError("timing needs at least 5 repeats");
  if (warmup < 1) throw ValidationError("timing needs at least 1 warmup run");
  if (X.rows() == 0) throw ValidationError("timing needs at least one sample");
  using clock = std::chrono::steady_clock;
  TimingReport r;
  r.warmup = warmup;
  r.repeats = repeats;
  r.n_samples = static_cast<std::size_t>(X.rows());
  r.cpu_model = cpu_model_name();
  r.cores = std::thread::hardware_concurrency();
  r.timer_resolution_ms = timer_resolution_ms();

  for (int i = 0; i < warmup; ++i) predict(X);
  double shortest_batch = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = clock::now();
    predict(X);
    const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    shortest_batch = std::min(shortest_batch, ms);
    r.per_sample_ms.push_back(ms / static_cast<double>(X.rows()));
  }
  std::vector<double> sorted = r.per_sample_ms;
  std::sort(sorted.begin(), sorted.end());
  r.median_ms = quantile_sorted(sorted, 0.5);
  r.min_ms = sorted.front();
  r.max_ms = sorted.back();
  r.iqr_ms = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  r.coarse_timer = shortest_batch < 100.0 * r.timer_resolution_ms;
  return r;
}

nlohmann::json to_json(const TimingReport& r) {
  return {{"median_ms", r.median_ms}, {"min_ms", r.min_ms}, {"max_ms", r.max_ms},
          {"iqr_ms", r.iqr_ms}, {"warmup", r.warmup}, {"repeats", r.repeats},
          {"n_samples", r.n_samples}, {"cpu_model", r.cpu_model}, {"cores", r.cores},
          {"timer_resolution_ms", r.timer_resolution_ms}, {"coarse_timer", r.coarse_timer}};
}

}  // namespace lobster::eval
