#include "lobster/learners/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lobster/common/error.hpp"
#include "lobster/common/rng.hpp"
#include "lobster/learners/common.hpp"

namespace lobster::learners {

void validate(const LogRegParams& params) {
  if (!(params.l2_strength > 0.0)) throw ValidationError("l2_strength must be positive");
  if (!(params.tol > 0.0)) throw ValidationError("tol must be positive");
  if (params.max_iter < 1) throw ValidationError("max_iter must be >= 1");
}

double logreg_objective(const Vector& weights, double intercept, const Matrix& X,
                        const Labels& y, double l2, Vector* grad) {
  const Vector margin = (X * weights).array() + intercept;
  const double loss = mean_log_loss_from_margin(margin, y) + 0.5 * l2 * weights.squaredNorm();
  if (grad) {
    const auto n = static_cast<double>(X.rows());
    Vector r(margin.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = (sigmoid(margin(i)) - y[static_cast<std::size_t>(i)]) / n;
    grad->resize(weights.size() + 1);
    grad->head(weights.size()) = X.transpose() * r + l2 * weights;
    (*grad)(weights.size()) = r.sum();
  }
  return loss;
}

LogRegModel logreg_fit(const Matrix& X, const Labels& y, const LogRegParams& params) {
  validate(params);
  check_training_set(X, y);
  const Eigen::Index d = X.cols();
  const auto n = static_cast<double>(X.rows());
  LogRegModel m;
  m.params = params;
  m.weights = Vector::Zero(d);
  double pos = 0;
  for (int label : y) pos += label;
  // Start at the prior log-odds, clipped so single-class data stays finite.
  const double prior = std::clamp(pos / n, 1e-6, 1.0 - 1e-6);
  m.intercept = std::log(prior / (1.0 - prior));

  Matrix Xa(X.rows(), d + 1);
  Xa << X, Vector::Ones(X.rows());
  Vector grad;
  double f = logreg_objective(m.weights, m.intercept, X, y, params.l2_strength, &grad);
  for (int it = 0; it < params.max_iter; ++it) {
    m.grad_norm = grad.lpNorm<Eigen::Infinity>();
    m.iterations = it;
    if (m.grad_norm < params.tol) return m;

    const Vector margin = (X * m.weights).array() + m.intercept;
    Vector w(margin.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double p = sigmoid(margin(i));
      w(i) = p * (1.0 - p) / n;
    }
    Matrix H = Xa.transpose() * w.asDiagonal() * Xa;
    H.diagonal().head(d).array() += params.l2_strength;
    H(d, d) += 1e-12;
    const Vector step = H.ldlt().solve(-grad);

    double t = 1.0;
    Vector new_grad;
    while (true) {
      const Vector nw = m.weights + t * step.head(d);
      const double nb = m.intercept + t * step(d);
      const double nf = logreg_objective(nw, nb, X, y, params.l2_strength, &new_grad);
      const bool armijo = nf <= f + 1e-4 * t * grad.dot(step);
      const bool flat = nf <= f + 1e-14 * std::max(1.0, std::abs(f)) &&
                        new_grad.lpNorm<Eigen::Infinity>() < grad.lpNorm<Eigen::Infinity>();
      if (armijo || flat || t < 1e-12) {
        m.weights = nw;
        m.intercept = nb;
        f = nf;
        grad = new_grad;
        break;
      }
      t *= 0.5;
    }
  }
  m.grad_norm = grad.lpNorm<Eigen::Infinity>();
  m.iterations = params.max_iter;
  if (m.grad_norm < params.tol) return m;
  throw ConvergenceError("logistic regression did not reach gradient norm " +
                         std::to_string(params.tol) + " (got " + std::to_string(m.grad_norm) + ")");
}

Matrix logreg_predict_proba(const LogRegModel& model, const Matrix& X) {
  check_query(X, model.weights.size());
  const Vector margin = (X * model.weights).array() + model.intercept;
  return two_column(margin.unaryExpr([](double z) { return sigmoid(z); }));
}

std::vector<double> default_l2_grid() { return {1e-4, 1e-3, 1e-2, 1e-1, 1.0}; }

LogRegModel logreg_fit_cv(const Matrix& X, const Labels& y, const std::vector<double>& strengths,
                          int folds, std::uint64_t seed) {
  if (strengths.empty()) throw ValidationError("empty regularisation grid");
  check_training_set(X, y);
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  const std::size_t minority = std::min(by_class[0].size(), by_class[1].size());
  LogRegParams params;
  if (folds < 2 || minority < static_cast<std::size_t>(folds) || strengths.size() == 1) {
    params.l2_strength = strengths.front();
    if (strengths.size() > 1) params.l2_strength = *std::max_element(strengths.begin(), strengths.end());
    return logreg_fit(X, y, params);
  }

  Rng rng(seed);
  std::vector<int> fold_of(y.size());
  for (auto& members : by_class) {
    rng.shuffle(members);
    for (std::size_t r = 0; r < members.size(); ++r) fold_of[members[r]] = static_cast<int>(r % static_cast<std::size_t>(folds));
  }

  double best_loss = std::numeric_limits<double>::infinity();
  double best_strength = strengths.front();
  for (double s : strengths) {
    params.l2_strength = s;
    double total = 0.0;
    for (int f = 0; f < folds; ++f) {
      std::vector<Eigen::Index> tr, te;
      for (std::size_t i = 0; i < y.size(); ++i) (fold_of[i] == f ? te : tr).push_back(static_cast<Eigen::Index>(i));
      Labels ytr, yte;
      for (auto i : tr) ytr.push_back(y[static_cast<std::size_t>(i)]);
      for (auto i : te) yte.push_back(y[static_cast<std::size_t>(i)]);
      const LogRegModel fm = logreg_fit(X(tr, Eigen::all), ytr, params);
      const Matrix Xte = X(te, Eigen::all);
      const Vector margin = (Xte * fm.weights).array() + fm.intercept;
      total += mean_log_loss_from_margin(margin, yte) * static_cast<double>(te.size());
    }
    const bool better = total < best_loss - 1e-12 ||
                        (std::abs(total - best_loss) <= 1e-12 && s > best_strength);
    if (better) {
      best_loss = total;
      best_strength = s;
    }
  }
  params.l2_strength = best_strength;
  return logreg_fit(X, y, params);
}

}  // namespace lobster::learners
