#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lobster/common/types.hpp"

namespace lobster::eval {

struct StatTestResult {
  std::string test;
  /// "exact" or "chi2" for McNemar, "percentile" for the bootstrap.
  std::string method;
  double statistic = 0.0;
  double p_value = 1.0;
  std::optional<double> adjusted_p;
  /// Point estimate (AUC difference in percentage points) for the bootstrap.
  double estimate = 0.0;
  std::optional<std::pair<double, double>> ci;
  long b = 0;
  long c = 0;
  bool zero_discordance = false;
  long resamples = 0;
  long redraws = 0;
};

/// b counts rows A got right and B got wrong, c the reverse. Exact two-sided
/// binomial test below 25 discordant pairs, else continuity-corrected chi^2.
/// The reported statistic is max(|b - c| - 1, 0)^2 / (b + c).
StatTestResult mcnemar(const Labels& pred_a, const Labels& pred_b, const Labels& y_true);

/// Two-sided exact binomial p for min(b, c) successes in b + c fair trials.
double binomial_two_sided(long b, long c);

/// Paired bootstrap of AUC(a) - AUC(b). Resample r draws from stream r of
/// `seed`; resamples containing a single class are redrawn from the same
/// stream and counted. The percentile interval is widened if needed so it
/// always contains the point estimate. p = min(1, 2 min(P(d <= 0), P(d >= 0))).
StatTestResult bootstrap_auc_diff(std::span<const double> scores_a, std::span<const double> scores_b,
                                  const Labels& y_true, int n_boot, std::uint64_t seed,
                                  double level = 0.95);

/// Linear-interpolated quantile of sorted data (q in [0, 1]).
double quantile_sorted(const std::vector<double>& sorted, double q);

/// Step-up adjusted p-values in the input order, clipped to 1.
std::vector<double> benjamini_hochberg(const std::vector<double>& p_values);

nlohmann::json to_json(const StatTestResult& result);

}  // namespace lobster::eval
