#include "lobster/learners/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lobster/common/error.hpp"
#include "lobster/common/parallel.hpp"
#include "lobster/learners/common.hpp"

namespace lobster::learners {

void validate(const RfParams& params) {
  if (params.n_estimators < 1) throw ValidationError("n_estimators must be >= 1");
  if (params.max_depth && *params.max_depth < 1) throw ValidationError("max_depth must be >= 1");
  if (params.min_samples_leaf < 1) throw ValidationError("min_samples_leaf must be >= 1");
  if (params.min_samples_split < 2) throw ValidationError("min_samples_split must be >= 2");
  resolve_max_features(params.max_features, 1 << 20);
}

int resolve_max_features(const std::string& spec, Eigen::Index d) {
  if (spec == "sqrt") return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
  if (spec == "all" || spec == "none") return static_cast<int>(d);
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(spec, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != spec.size() || value < 1) {
    throw ValidationError("max_features must be sqrt, all, or a positive integer; got " + spec);
  }
  return std::min(value, static_cast<int>(d));
}

RfModel rf_fit(const Matrix& X, const Labels& y, const RfParams& params, std::uint64_t seed,
               int jobs) {
  validate(params);
  check_training_set(X, y);
  RfModel model;
  model.params = params;
  model.n_features = X.cols();
  model.trees.resize(static_cast<std::size_t>(params.n_estimators));

  CartParams cart;
  cart.max_depth = params.max_depth;
  cart.min_samples_leaf = params.min_samples_leaf;
  cart.min_samples_split = params.min_samples_split;
  cart.max_features = resolve_max_features(params.max_features, X.cols());

  const auto n = static_cast<std::size_t>(X.rows());
  const Rng master(seed);
  parallel_for(model.trees.size(), jobs, [&](std::size_t t) {
    Rng rng = master.split(t);
    std::vector<std::size_t> rows(n);
    if (params.bootstrap) {
      for (auto& r : rows) r = rng.below(n);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    model.trees[t] = build_cart(X, y, rows, cart, rng);
  });
  return model;
}

Matrix rf_predict_proba(const RfModel& model, const Matrix& X) {
  check_query(X, model.n_features);
  Vector positive = Vector::Zero(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Vector row = X.row(i).transpose();
    for (const auto& tree : model.trees) positive(i) += tree.predict(row);
  }
  positive /= static_cast<double>(model.trees.size());
  return two_column(positive);
}

void validate(const GbtParams& params) {
  if (params.n_estimators < 1) throw ValidationError("n_estimators must be >= 1");
  if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0)) {
    throw ValidationError("learning_rate must lie in (0, 1]");
  }
  if (params.max_depth < 1) throw ValidationError("max_depth must be >= 1");
  if (!(params.subsample > 0.0 && params.subsample <= 1.0)) {
    throw ValidationError("subsample must lie in (0, 1]");
  }
  if (!(params.colsample_bytree > 0.0 && params.colsample_bytree <= 1.0)) {
    throw ValidationError("colsample_bytree must lie in (0, 1]");
  }
  if (!(params.reg_lambda >= 0.0)) throw ValidationError("reg_lambda must be >= 0");
  if (!(params.min_child_weight >= 0.0)) throw ValidationError("min_child_weight must be >= 0");
}

GbtModel gbt_fit(const Matrix& X, const Labels& y, const GbtParams& params, std::uint64_t seed) {
  validate(params);
  check_training_set(X, y);
  double pos = 0;
  for (int label : y) pos += label;
  const auto n = static_cast<double>(y.size());
  if (pos == 0.0 || pos == n) throw ValidationError("boosting target has a single class");

  GbtModel model;
  model.params = params;
  model.n_features = X.cols();
  model.base_margin = std::log(pos / (n - pos));

  const Eigen::Index N = X.rows();
  const int d = static_cast<int>(X.cols());
  Vector F = Vector::Constant(N, model.base_margin);
  Vector g(N), h(N);
  model.train_loss.push_back(mean_log_loss_from_margin(F, y));

  const auto n_rows = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(params.subsample * static_cast<double>(N))));
  const int n_cols = std::max(1, static_cast<int>(std::lround(params.colsample_bytree * d)));
  BoostTreeParams tp{params.max_depth, params.reg_lambda,
                     params.newton_leaves ? params.min_child_weight : 0.0};

  Rng rng(seed);
  std::vector<std::size_t> all_rows(static_cast<std::size_t>(N));
  std::iota(all_rows.begin(), all_rows.end(), 0);
  std::vector<int> all_cols(static_cast<std::size_t>(d));
  std::iota(all_cols.begin(), all_cols.end(), 0);

  for (int stage = 0; stage < params.n_estimators; ++stage) {
    for (Eigen::Index i = 0; i < N; ++i) {
      const double p = sigmoid(F(i));
      g(i) = p - y[static_cast<std::size_t>(i)];
      h(i) = params.newton_leaves ? std::max(p * (1.0 - p), 1e-16) : 1.0;
    }
    std::vector<std::size_t> rows = all_rows;
    if (n_rows < rows.size()) {
      rng.shuffle(rows);
      rows.resize(n_rows);
      std::sort(rows.begin(), rows.end());
    }
    std::vector<int> cols = all_cols;
    if (n_cols < d) {
      rng.shuffle(cols);
      cols.resize(static_cast<std::size_t>(n_cols));
      std::sort(cols.begin(), cols.end());
    }
    DecisionTree tree = build_boost_tree(X, g, h, rows, cols, tp);
    for (auto& node : tree.nodes) node.value *= params.learning_rate;
    for (Eigen::Index i = 0; i < N; ++i) F(i) += tree.predict(X.row(i).transpose());
    const double loss = mean_log_loss_from_margin(F, y);
    if (!std::isfinite(loss)) throw ConvergenceError("boosting produced a non-finite loss");
    model.train_loss.push_back(loss);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

Vector gbt_margin(const GbtModel& model, const Matrix& X) {
  check_query(X, model.n_features);
  Vector F = Vector::Constant(X.rows(), model.base_margin);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Vector row = X.row(i).transpose();
    for (const auto& tree : model.trees) F(i) += tree.predict(row);
  }
  return F;
}

Matrix gbt_predict_proba(const GbtModel& model, const Matrix& X) {
  const Vector F = gbt_margin(model, X);
  return two_column(F.unaryExpr([](double z) { return sigmoid(z); }));
}

}  // namespace lobster::learners
