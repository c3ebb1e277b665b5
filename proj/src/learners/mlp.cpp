#include "lobster/learners/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lobster/common/error.hpp"
#include "lobster/common/rng.hpp"
#include "lobster/learners/common.hpp"
#include "lobster/neural/optimizer.hpp"

namespace lobster::learners {
namespace {

struct Views {
  Eigen::Map<const Matrix> W1;
  Eigen::Map<const Vector> b1;
  Eigen::Map<const Vector> w2;
  double b2;
};

Views views(const MlpModel& m) {
  const Eigen::Index d = m.n_features;
  const Eigen::Index h = m.params.hidden_units;
  const double* p = m.theta.data();
  return {Eigen::Map<const Matrix>(p, d, h), Eigen::Map<const Vector>(p + d * h, h),
          Eigen::Map<const Vector>(p + d * h + h, h), p[d * h + 2 * h]};
}

Matrix activate(const Matrix& Z, Activation act) {
  return act == Activation::kRelu ? Matrix(Z.cwiseMax(0.0)) : Matrix(Z.array().tanh().matrix());
}

Vector forward_margin(const MlpModel& m, const Matrix& X, Matrix* Z1, Matrix* A1) {
  const auto v = views(m);
  Matrix Z = (X * v.W1).rowwise() + v.b1.transpose();
  Matrix A = activate(Z, m.params.activation);
  Vector margin = (A * v.w2).array() + v.b2;
  if (Z1) *Z1 = std::move(Z);
  if (A1) *A1 = std::move(A);
  return margin;
}

}  // namespace

void validate(const MlpParams& params) {
  if (params.hidden_units < 1) throw ValidationError("hidden_units must be >= 1");
  if (!(params.alpha >= 0.0)) throw ValidationError("alpha must be >= 0");
  if (!(params.learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (params.batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (params.max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  if (!(params.validation_fraction > 0.0 && params.validation_fraction < 1.0)) {
    throw ValidationError("validation_fraction must lie in (0, 1)");
  }
  if (params.patience < 1) throw ValidationError("patience must be >= 1");
}

double mlp_loss_and_gradient(const MlpModel& model, const Matrix& X, const Labels& y,
                             Vector* grad) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = model.n_features;
  const Eigen::Index h = model.params.hidden_units;
  const double alpha = model.params.alpha;
  Matrix Z1, A1;
  const Vector margin = forward_margin(model, X, &Z1, &A1);
  const auto v = views(model);

  double loss = mean_log_loss_from_margin(margin, y) +
                0.5 * alpha * (v.W1.squaredNorm() + v.w2.squaredNorm());
  if (!grad) return loss;

  Vector dz(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dz(i) = (sigmoid(margin(i)) - y[static_cast<std::size_t>(i)]) / static_cast<double>(n);
  }
  grad->resize(model.theta.size());
  double* g = grad->data();
  Eigen::Map<Matrix> gW1(g, d, h);
  Eigen::Map<Vector> gb1(g + d * h, h);
  Eigen::Map<Vector> gw2(g + d * h + h, h);

  gw2 = A1.transpose() * dz + alpha * v.w2;
  g[d * h + 2 * h] = dz.sum();
  Matrix dA = dz * v.w2.transpose();
  if (model.params.activation == Activation::kRelu) {
    dA.array() *= (Z1.array() > 0.0).cast<double>();
  } else {
    dA.array() *= 1.0 - A1.array().square();
  }
  gW1 = X.transpose() * dA + alpha * v.W1;
  gb1 = dA.colwise().sum().transpose();
  return loss;
}

MlpModel mlp_init(const MlpParams& params, Eigen::Index n_features, std::uint64_t seed) {
  validate(params);
  MlpModel m;
  m.params = params;
  m.n_features = n_features;
  m.theta = Vector::Zero(m.n_params());
  Rng rng(seed);
  const Eigen::Index h = params.hidden_units;
  const double lim1 = std::sqrt(6.0 / static_cast<double>(n_features + h));
  for (Eigen::Index i = 0; i < n_features * h; ++i) m.theta(i) = rng.uniform(-lim1, lim1);
  const double lim2 = std::sqrt(6.0 / static_cast<double>(h + 1));
  for (Eigen::Index i = 0; i < h; ++i) m.theta(n_features * h + h + i) = rng.uniform(-lim2, lim2);
  return m;
}

MlpModel mlp_fit(const Matrix& X, const Labels& y, const MlpParams& params, std::uint64_t seed) {
  check_training_set(X, y);
  check_two_classes(y);
  MlpModel model = mlp_init(params, X.cols(), seed);
  Rng rng = Rng(seed).split(1);

  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> train_idx = order, val_idx;
  if (params.early_stopping) {
    rng.shuffle(order);
    const auto n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(params.validation_fraction * static_cast<double>(y.size()))));
    if (n_val >= y.size()) throw ValidationError("too few rows for an MLP validation split");
    val_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    train_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
  }
  auto gather = [&](const std::vector<std::size_t>& idx, Matrix& Xs, Labels& ys) {
    Xs.resize(static_cast<Eigen::Index>(idx.size()), X.cols());
    ys.resize(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      Xs.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(idx[r]));
      ys[r] = y[idx[r]];
    }
  };
  Matrix Xv;
  Labels yv;
  if (params.early_stopping) gather(val_idx, Xv, yv);

  neural::OptimizerConfig oc;
  oc.learning_rate = params.learning_rate;
  neural::Optimizer opt(oc, model.theta.size());
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(params.batch_size), train_idx.size());

  Vector best_theta = model.theta;
  double best_val = std::numeric_limits<double>::infinity();
  int stale = 0;
  Vector grad;
  Matrix Xb;
  Labels yb;
  for (int epoch = 0; epoch < params.max_epochs; ++epoch) {
    std::vector<std::size_t> perm = train_idx;
    rng.shuffle(perm);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < perm.size(); start += batch) {
      const std::size_t end = std::min(perm.size(), start + batch);
      gather({perm.begin() + static_cast<std::ptrdiff_t>(start), perm.begin() + static_cast<std::ptrdiff_t>(end)}, Xb, yb);
      const double loss = mlp_loss_and_gradient(model, Xb, yb, &grad);
      if (!std::isfinite(loss)) {
        throw ConvergenceError("MLP loss became non-finite at epoch " + std::to_string(epoch));
      }
      epoch_loss += loss * static_cast<double>(end - start);
      opt.step(model.theta, grad);
    }
    model.train_loss.push_back(epoch_loss / static_cast<double>(perm.size()));
    if (!params.early_stopping) {
      model.best_epoch = epoch;
      continue;
    }
    const double vl = mlp_loss_and_gradient(model, Xv, yv, nullptr);
    model.val_loss.push_back(vl);
    if (vl < best_val) {
      best_val = vl;
      best_theta = model.theta;
      model.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= params.patience) {
      break;
    }
  }
  if (params.early_stopping) model.theta = best_theta;
  return model;
}

Matrix mlp_predict_proba(const MlpModel& model, const Matrix& X) {
  check_query(X, model.n_features);
  const Vector margin = forward_margin(model, X, nullptr, nullptr);
  return two_column(margin.unaryExpr([](double z) { return sigmoid(z); }));
}

}  // namespace lobster::learners
