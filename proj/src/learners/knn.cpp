#include "lobster/learners/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "lobster/common/error.hpp"
#include "lobster/learners/common.hpp"

namespace lobster::learners {

void validate(const KnnParams& params) {
  if (params.k < 1) throw ValidationError("KNN k must be >= 1");
  if (!(params.p >= 1.0) || !std::isfinite(params.p)) {
    throw ValidationError("KNN Minkowski p must be a finite value >= 1");
  }
}

double minkowski(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, double p) {
  if (p == 1.0) return (a - b).cwiseAbs().sum();
  if (p == 2.0) return (a - b).norm();
  return std::pow((a - b).cwiseAbs().array().pow(p).sum(), 1.0 / p);
}

KnnModel knn_fit(const Matrix& X, const Labels& y, const KnnParams& params) {
  validate(params);
  check_training_set(X, y);
  if (static_cast<Eigen::Index>(params.k) > X.rows()) {
    throw ValidationError("KNN k=" + std::to_string(params.k) + " exceeds " +
                          std::to_string(X.rows()) + " training rows");
  }
  return KnnModel{params, X, y};
}

Matrix knn_predict_proba(const KnnModel& model, const Matrix& X) {
  check_query(X, model.X.cols());
  const auto n_train = static_cast<std::size_t>(model.X.rows());
  const auto k = static_cast<std::size_t>(model.params.k);
  Vector positive(X.rows());

  std::vector<std::pair<double, std::size_t>> dist(n_train);
  // Training rows as contiguous columns.
  const Matrix train_t = model.X.transpose();
  const double p = model.params.p;
  Vector d(static_cast<Eigen::Index>(n_train));
  for (Eigen::Index q = 0; q < X.rows(); ++q) {
    const Vector query = X.row(q).transpose();
    if (p == 1.0) {
      d = (train_t.colwise() - query).cwiseAbs().colwise().sum().transpose();
    } else if (p == 2.0) {
      d = (train_t.colwise() - query).colwise().norm().transpose();
    } else {
      for (std::size_t i = 0; i < n_train; ++i) d(static_cast<Eigen::Index>(i)) = minkowski(train_t.col(static_cast<Eigen::Index>(i)), query, p);
    }
    for (std::size_t i = 0; i < n_train; ++i) dist[i] = {d(static_cast<Eigen::Index>(i)), i};
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

    double votes[2] = {0.0, 0.0};
    if (model.params.weights == KnnWeights::kDistance) {
      bool exact = false;
      for (std::size_t j = 0; j < k; ++j) exact = exact || dist[j].first == 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const int label = model.y[dist[j].second];
        if (exact) {
          if (dist[j].first == 0.0) votes[label] += 1.0;
        } else {
          votes[label] += 1.0 / dist[j].first;
        }
      }
    } else {
      for (std::size_t j = 0; j < k; ++j) votes[model.y[dist[j].second]] += 1.0;
    }
    positive(q) = votes[1] / (votes[0] + votes[1]);
  }
  return two_column(positive);
}

}  // namespace lobster::learners
