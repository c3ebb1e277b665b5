#pragma once

#include <array>
#include <string>
#include <vector>

#include "lobster/eval/metrics.hpp"

namespace lobster::eval {

/// How tied values share ranks.
enum class TieRule {
  /// Floor of the average of the tied positions (reproduces the published tables).
  kMidrankFloor,
  /// Standard competition ranking: ties share the smallest position.
  kMin,
  /// Fractional average of the tied positions.
  kAverage,
};

TieRule parse_tie_rule(const std::string& name);
std::string to_string(TieRule rule);

inline constexpr std::array<const char*, 6> kRankColumns = {"Acc", "Prec", "Rec", "F1", "AUC", "IT"};

struct RankRow {
  std::string model;
  int mfcc = 0;
  std::array<double, 6> ranks{};
  /// Mean of the six ranks rounded to two decimals.
  double avg_rank = 0.0;
};

/// Ranks each column (rates descending, IT ascending unless it_ascending is
/// false) and averages. Rows keep their input order. Throws ValidationError on
/// duplicate model ids.
std::vector<RankRow> rank_summary(const std::vector<MetricRow>& rows, TieRule rule = TieRule::kMidrankFloor,
                                  bool it_ascending = true);

/// Ranks of `values` where lower is better.
std::vector<double> rank_values(const std::vector<double>& values, TieRule rule);

std::string format_rank_table(const std::vector<RankRow>& rows);
std::string ranks_to_csv(const std::vector<RankRow>& rows);
std::vector<RankRow> ranks_from_csv(const std::string& text);

}  // namespace lobster::eval
