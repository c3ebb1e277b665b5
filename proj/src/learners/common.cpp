#include "lobster/learners/common.hpp"

#include <string>

#include "lobster/common/error.hpp"

namespace lobster::learners {

void check_training_set(const Matrix& X, const Labels& y) {
  if (X.rows() == 0) throw ValidationError("empty training set");
  if (X.cols() == 0) throw ValidationError("training set has no features");
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) {
    throw ValidationError("label count " + std::to_string(y.size()) + " does not match " +
                          std::to_string(X.rows()) + " rows");
  }
  for (int label : y) {
    if (label != 0 && label != 1) {
      throw ValidationError("labels must be binary 0/1, got " + std::to_string(label));
    }
  }
  if (!X.allFinite()) throw ValidationError("training features contain non-finite values");
}

void check_two_classes(const Labels& y) {
  bool seen[2] = {false, false};
  for (int label : y) seen[label] = true;
  if (!seen[0] || !seen[1]) throw ValidationError("training labels contain a single class");
}

void check_query(const Matrix& X, Eigen::Index expected_dim) {
  if (X.rows() == 0) throw ValidationError("empty query");
  if (X.cols() != expected_dim) {
    throw ValidationError("query has " + std::to_string(X.cols()) + " columns, model expects " +
                          std::to_string(expected_dim));
  }
}

Matrix two_column(const Vector& positive) {
  Matrix out(positive.size(), 2);
  out.col(1) = positive;
  out.col(0) = Vector::Ones(positive.size()) - positive;
  return out;
}

double mean_log_loss_from_margin(const Vector& margin, const Labels& y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < margin.size(); ++i) {
    total += softplus(margin(i)) - y[static_cast<std::size_t>(i)] * margin(i);
  }
  return total / static_cast<double>(margin.size());
}

}  // namespace lobster::learners
