#include "lobster/eval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lobster/common/error.hpp"
#include "lobster/common/rng.hpp"
#include "lobster/eval/metrics.hpp"

namespace lobster::eval {

double binomial_two_sided(long b, long c) {
  const long n = b + c;
  if (n == 0) return 1.0;
  const long k = std::min(b, c);
  double tail = 0.0;
  for (long i = 0; i <= k; ++i) {
    const double log_term = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(i) + 1.0) -
                            std::lgamma(static_cast<double>(n - i) + 1.0) - static_cast<double>(n) * std::log(2.0);
    tail += std::exp(log_term);
  }
  return std::min(1.0, 2.0 * tail);
}

StatTestResult mcnemar(const Labels& pred_a, const Labels& pred_b, const Labels& y_true) {
  if (pred_a.size() != y_true.size() || pred_b.size() != y_true.size()) {
    throw ValidationError("McNemar inputs must be aligned on the same test set");
  }
  if (y_true.empty()) throw ValidationError("McNemar needs at least one row");
  StatTestResult r;
  r.test = "mcnemar";
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool a = pred_a[i] == y_true[i];
    const bool b = pred_b[i] == y_true[i];
    if (a && !b) ++r.b;
    if (!a && b) ++r.c;
  }
  const long n = r.b + r.c;
  if (n == 0) {
    r.method = "exact";
    r.zero_discordance = true;
    r.p_value = 1.0;
    return r;
  }
  const double excess = std::max<double>(std::abs(r.b - r.c) - 1.0, 0.0);
  r.statistic = excess * excess / static_cast<double>(n);
  if (n < 25) {
    r.method = "exact";
    r.p_value = binomial_two_sided(r.b, r.c);
  } else {
    r.method = "chi2";
    r.p_value = std::min(1.0, std::erfc(std::sqrt(r.statistic / 2.0)));
  }
  return r;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

StatTestResult bootstrap_auc_diff(std::span<const double> scores_a, std::span<const double> scores_b,
                                  const Labels& y_true, int n_boot, std::uint64_t seed, double level) {
  if (n_boot < 100) throw ValidationError("bootstrap needs at least 100 resamples");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must lie in (0, 1)");
  if (scores_a.size() != y_true.size() || scores_b.size() != y_true.size()) {
    throw ValidationError("bootstrap inputs must be aligned on the same test set");
  }
  StatTestResult r;
  r.test = "bootstrap_auc_diff";
  r.method = "percentile";
  r.estimate = roc_auc(y_true, scores_a) - roc_auc(y_true, scores_b);
  r.statistic = r.estimate;

  const std::size_t n = y_true.size();
  const Rng master(seed);
  std::vector<double> deltas;
  deltas.reserve(static_cast<std::size_t>(n_boot));
  std::vector<double> sa(n), sb(n);
  Labels yy(n);
  const long max_redraws = 1000L * n_boot;
  for (int rep = 0; rep < n_boot; ++rep) {
    Rng rng = master.split(static_cast<std::uint64_t>(rep));
    while (true) {
      int pos = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = rng.below(n);
        sa[i] = scores_a[j];
        sb[i] = scores_b[j];
        yy[i] = y_true[j];
        pos += yy[i];
      }
      if (pos > 0 && static_cast<std::size_t>(pos) < n) break;
      if (++r.redraws > max_redraws) throw DataError("bootstrap kept drawing single-class resamples");
    }
    deltas.push_back(roc_auc(yy, sa) - roc_auc(yy, sb));
  }
  r.resamples = n_boot;
  std::sort(deltas.begin(), deltas.end());
  const double alpha = 1.0 - level;
  double lo = quantile_sorted(deltas, alpha / 2.0);
  double hi = quantile_sorted(deltas, 1.0 - alpha / 2.0);
  lo = std::min(lo, r.estimate);
  hi = std::max(hi, r.estimate);
  r.ci = std::make_pair(lo, hi);
  double le = 0, ge = 0;
  for (double d : deltas) {
    le += d <= 0.0;
    ge += d >= 0.0;
  }
  r.p_value = std::min(1.0, 2.0 * std::min(le, ge) / static_cast<double>(n_boot));
  return r;
}

std::vector<double> benjamini_hochberg(const std::vector<double>& p) {
  const std::size_t m = p.size();
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("p-values must lie in [0, 1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> adj(m);
  double running = 1.0;
  for (std::size_t r = m; r-- > 0;) {
    const double v = p[order[r]] * (static_cast<double>(m) / static_cast<double>(r + 1));
    running = std::min(running, v);
    adj[order[r]] = std::min(1.0, running);
  }
  return adj;
}

nlohmann::json to_json(const StatTestResult& r) {
  nlohmann::json j = {{"test", r.test}, {"method", r.method}, {"statistic", r.statistic},
                      {"p_value", r.p_value}};
  j["adjusted_p"] = r.adjusted_p ? nlohmann::json(*r.adjusted_p) : nlohmann::json(nullptr);
  if (r.test == "mcnemar") {
    j["b"] = r.b;
    j["c"] = r.c;
    j["zero_discordance"] = r.zero_discordance;
  } else {
    j["estimate"] = r.estimate;
    j["ci"] = r.ci ? nlohmann::json::array({r.ci->first, r.ci->second}) : nlohmann::json(nullptr);
    j["resamples"] = r.resamples;
    j["redraws"] = r.redraws;
  }
  return j;
}

}  // namespace lobster::eval
