#include "lobster/eval/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>

#include "lobster/common/error.hpp"
#include "lobster/common/io.hpp"

namespace lobster::eval {

TieRule parse_tie_rule(const std::string& name) {
  if (name == "midrank_floor") return TieRule::kMidrankFloor;
  if (name == "min") return TieRule::kMin;
  if (name == "average") return TieRule::kAverage;
  throw ValidationError("unknown tie rule '" + name + "' (expected midrank_floor, min or average)");
}

std::string to_string(TieRule rule) {
  switch (rule) {
    case TieRule::kMidrankFloor: return "midrank_floor";
    case TieRule::kMin: return "min";
    case TieRule::kAverage: return "average";
  }
  return "unknown";
}

std::vector<double> rank_values(const std::vector<double>& values, TieRule rule) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double first = static_cast<double>(i + 1);
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    double r = first;
    if (rule == TieRule::kAverage) r = mid;
    if (rule == TieRule::kMidrankFloor) r = std::floor(mid);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

std::vector<RankRow> rank_summary(const std::vector<MetricRow>& rows, TieRule rule, bool it_ascending) {
  std::set<std::string> seen;
  for (const auto& r : rows) {
    if (!seen.insert(r.model).second) throw ValidationError("duplicate model id '" + r.model + "'");
  }
  std::vector<RankRow> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[i].model = rows[i].model;
    out[i].mfcc = rows[i].mfcc;
  }
  for (int col = 0; col < 6; ++col) {
    std::vector<double> key(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      const double v[6] = {r.accuracy, r.precision, r.recall, r.f1, r.auc_roc, r.it_ms};
      const bool ascending = col == 5 ? it_ascending : false;
      // Unmeasured values tie for last place.
      key[i] = std::isnan(v[col]) ? std::numeric_limits<double>::infinity() : (ascending ? v[col] : -v[col]);
    }
    const auto ranks = rank_values(key, rule);
    for (std::size_t i = 0; i < rows.size(); ++i) out[i].ranks[static_cast<std::size_t>(col)] = ranks[i];
  }
  for (auto& r : out) {
    const double mean = std::accumulate(r.ranks.begin(), r.ranks.end(), 0.0) / 6.0;
    r.avg_rank = std::round(mean * 100.0) / 100.0;
  }
  return out;
}

namespace {

std::string rank_text(double r) {
  return r == std::floor(r) ? std::to_string(static_cast<long>(r)) : format_fixed(r, 1);
}

}  // namespace

std::string format_rank_table(const std::vector<RankRow>& rows) {
  std::size_t w = 5;
  for (const auto& r : rows) w = std::max(w, r.model.size());
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-*s %5s %5s %5s %5s %5s %5s %5s %8s\n", static_cast<int>(w), "Model", "MFCC",
                "Acc", "Prec", "Rec", "F1", "AUC", "IT", "AvgRank");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s %5d", static_cast<int>(w), r.model.c_str(), r.mfcc);
    out += buf;
    for (double k : r.ranks) {
      std::snprintf(buf, sizeof buf, " %5s", rank_text(k).c_str());
      out += buf;
    }
    std::snprintf(buf, sizeof buf, " %8.2f\n", r.avg_rank);
    out += buf;
  }
  return out;
}

std::string ranks_to_csv(const std::vector<RankRow>& rows) {
  std::string out = "model,mfcc,acc,prec,rec,f1,auc,it,avg_rank\n";
  for (const auto& r : rows) {
    out += r.model + "," + std::to_string(r.mfcc);
    for (double k : r.ranks) out += "," + rank_text(k);
    out += "," + format_fixed(r.avg_rank, 2) + "\n";
  }
  return out;
}

std::vector<RankRow> ranks_from_csv(const std::string& text) {
  const auto lines = nonblank_lines(text);
  if (lines.empty() || lines.front() != "model,mfcc,acc,prec,rec,f1,auc,it,avg_rank") {
    throw DataError("rank CSV has an unexpected header");
  }
  std::vector<RankRow> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 9) throw DataError("rank CSV line " + std::to_string(i + 1) + " needs 9 fields");
    RankRow r;
    try {
      r.model = f[0];
      r.mfcc = std::stoi(f[1]);
      for (std::size_t k = 0; k < 6; ++k) r.ranks[k] = std::stod(f[2 + k]);
      r.avg_rank = std::stod(f[8]);
    } catch (const std::exception&) {
      throw DataError("rank CSV line " + std::to_string(i + 1) + " is not numeric");
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace lobster::eval
