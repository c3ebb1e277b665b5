#include "lobster/learners/naive_bayes.hpp"

#include <cmath>
#include <numbers>

#include "lobster/common/error.hpp"
#include "lobster/learners/common.hpp"

namespace lobster::learners {

void validate(const GaussianNbParams& params) {
  if (!(params.var_smoothing >= 0.0)) throw ValidationError("var_smoothing must be >= 0");
}

GaussianNbModel gaussian_nb_fit(const Matrix& X, const Labels& y, const GaussianNbParams& params) {
  validate(params);
  check_training_set(X, y);
  const Eigen::Index d = X.cols();
  GaussianNbModel m;
  m.params = params;
  m.means = Matrix::Zero(2, d);
  m.variances = Matrix::Zero(2, d);
  m.log_prior = Vector::Zero(2);

  Eigen::Index count[2] = {0, 0};
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const int c = y[static_cast<std::size_t>(i)];
    m.means.row(c) += X.row(i);
    ++count[c];
  }
  for (int c = 0; c < 2; ++c) {
    if (count[c] < 2) throw ValidationError("Gaussian NB needs at least two rows per class");
    m.means.row(c) /= static_cast<double>(count[c]);
  }
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const int c = y[static_cast<std::size_t>(i)];
    m.variances.row(c) += (X.row(i) - m.means.row(c)).array().square().matrix();
  }
  const Vector centred_all = (X.rowwise() - X.colwise().mean()).array().square().colwise().mean();
  m.epsilon = params.var_smoothing * centred_all.maxCoeff();
  for (int c = 0; c < 2; ++c) {
    m.variances.row(c) /= static_cast<double>(count[c]);
    m.variances.row(c).array() += m.epsilon;
    m.log_prior(c) = std::log(static_cast<double>(count[c]) / static_cast<double>(X.rows()));
  }
  if ((m.variances.array() <= 0.0).any()) {
    throw ValidationError("Gaussian NB found a zero-variance feature with var_smoothing 0");
  }
  return m;
}

Matrix gaussian_nb_log_joint(const GaussianNbModel& model, const Matrix& X) {
  check_query(X, model.means.cols());
  Matrix out(X.rows(), 2);
  for (int c = 0; c < 2; ++c) {
    const auto var = model.variances.row(c).array();
    const double norm = -0.5 * (2.0 * std::numbers::pi * var).log().sum();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double quad = ((X.row(i) - model.means.row(c)).array().square() / var).sum();
      out(i, c) = model.log_prior(c) + norm - 0.5 * quad;
    }
  }
  return out;
}

Matrix gaussian_nb_predict_proba(const GaussianNbModel& model, const Matrix& X) {
  const Matrix joint = gaussian_nb_log_joint(model, X);
  Vector positive(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    // p1 = 1 / (1 + exp(l0 - l1))
    positive(i) = sigmoid(joint(i, 1) - joint(i, 0));
  }
  return two_column(positive);
}

}  // namespace lobster::learners
