#pragma once

#include <span>
#include <string>
#include <vector>

#include "lobster/common/types.hpp"

namespace lobster::eval {

struct Confusion {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;

  long total() const { return tp + fp + tn + fn; }
};

/// One evaluated model. Rates are percentages.
struct MetricRow {
  std::string model;
  int mfcc = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc_roc = 0.0;
  /// Per-sample inference time; NaN when not measured.
  double it_ms = 0.0;
  Confusion confusion;
  /// Set when a 0/0 rate was reported as 0.
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  bool f1_degenerate = false;
};

/// Accuracy, precision, recall and F1 for `positive`. Throws ValidationError on
/// empty or misaligned input.
MetricRow confusion_and_rates(const Labels& y_true, const Labels& y_pred, int positive = 1);

/// Mann-Whitney AUC with average ranks for ties, as a percentage. Throws
/// ValidationError when only one class is present.
double roc_auc(const Labels& y_true, std::span<const double> scores, int positive = 1);

inline constexpr const char* kMetricsHeader = "model,mfcc,accuracy,precision,recall,f1,auc_roc,it_ms";

std::string metrics_to_csv(const std::vector<MetricRow>& rows);
/// Throws DataError on a header mismatch or unparseable field.
std::vector<MetricRow> metrics_from_csv(const std::string& text);

/// Fixed-width table in the layout of the published metric tables.
std::string format_metric_table(const std::vector<MetricRow>& rows);

}  // namespace lobster::eval
