#include "lobster/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "lobster/common/error.hpp"
#include "lobster/common/io.hpp"

namespace lobster::eval {

MetricRow confusion_and_rates(const Labels& y_true, const Labels& y_pred, int positive) {
  if (y_true.empty()) throw ValidationError("cannot score an empty prediction set");
  if (y_true.size() != y_pred.size()) throw ValidationError("truth and prediction lengths differ");
  if (positive != 0 && positive != 1) throw ValidationError("positive class must be 0 or 1");
  MetricRow r;
  Confusion& c = r.confusion;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if ((y_true[i] != 0 && y_true[i] != 1) || (y_pred[i] != 0 && y_pred[i] != 1)) {
      throw ValidationError("labels must be binary 0/1");
    }
    const bool t = y_true[i] == positive;
    const bool p = y_pred[i] == positive;
    if (t && p) ++c.tp;
    else if (!t && p) ++c.fp;
    else if (!t && !p) ++c.tn;
    else ++c.fn;
  }
  r.accuracy = 100.0 * static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  if (c.tp + c.fp == 0) r.precision_degenerate = true;
  else r.precision = 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn == 0) r.recall_degenerate = true;
  else r.recall = 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (r.precision + r.recall == 0.0) r.f1_degenerate = true;
  else r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

double roc_auc(const Labels& y_true, std::span<const double> scores, int positive) {
  if (y_true.size() != scores.size()) throw ValidationError("truth and score lengths differ");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  double n_pos = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (y_true[order[k]] == positive) {
        rank_sum += avg;
        n_pos += 1.0;
      }
    }
    i = j + 1;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw ValidationError("AUC needs both classes present");
  const double u = rank_sum - n_pos * (n_pos + 1.0) / 2.0;
  return 100.0 * u / (n_pos * n_neg);
}

namespace {

std::string num(double v, int digits) {
  if (std::isnan(v)) return "nan";
  return format_fixed(v, digits);
}

double parse_field(const std::string& s) {
  if (s == "nan" || s == "NaN" || s.empty()) return std::nan("");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw DataError("unparseable metric value '" + s + "'");
  }
  if (used != s.size()) throw DataError("unparseable metric value '" + s + "'");
  return v;
}

}  // namespace

std::string metrics_to_csv(const std::vector<MetricRow>& rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : rows) {
    out += csv_escape(r.model) + "," + std::to_string(r.mfcc) + "," + num(r.accuracy, 4) + "," +
           num(r.precision, 4) + "," + num(r.recall, 4) + "," + num(r.f1, 4) + "," +
           num(r.auc_roc, 4) + "," + num(r.it_ms, 4) + "\n";
  }
  return out;
}

std::vector<MetricRow> metrics_from_csv(const std::string& text) {
  const auto lines = nonblank_lines(text);
  if (lines.empty() || lines.front() != kMetricsHeader) {
    throw DataError(std::string("metrics CSV must start with header ") + kMetricsHeader);
  }
  std::vector<MetricRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 8) throw DataError("metrics CSV line " + std::to_string(i + 1) + " needs 8 fields");
    MetricRow r;
    r.model = f[0];
    try {
      r.mfcc = std::stoi(f[1]);
    } catch (const std::exception&) {
      throw DataError("bad mfcc value '" + f[1] + "'");
    }
    r.accuracy = parse_field(f[2]);
    r.precision = parse_field(f[3]);
    r.recall = parse_field(f[4]);
    r.f1 = parse_field(f[5]);
    r.auc_roc = parse_field(f[6]);
    r.it_ms = parse_field(f[7]);
    rows.push_back(r);
  }
  return rows;
}

std::string format_metric_table(const std::vector<MetricRow>& rows) {
  std::size_t w = 5;
  for (const auto& r : rows) w = std::max(w, r.model.size());
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-*s %5s %9s %10s %8s %9s %8s %12s\n", static_cast<int>(w), "Model",
                "MFCC", "Acc(%)", "Prec(%)", "Rec(%)", "F1(%)", "AUC(%)", "IT(ms)");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s %5d %9.2f %10.2f %8.2f %9.2f %8.2f %12.4f\n",
                  static_cast<int>(w), r.model.c_str(), r.mfcc, r.accuracy, r.precision, r.recall, r.f1,
                  r.auc_roc, r.it_ms);
    out += buf;
  }
  return out;
}

}  // namespace lobster::eval
