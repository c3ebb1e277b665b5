#pragma once

#include <cstdint>
#include <string>

#include "lobster/common/error.hpp"
#include "lobster/common/types.hpp"

namespace lobster::learners {

struct SvmGamma {
  enum class Mode { kScale, kAuto, kValue };
  Mode mode = Mode::kScale;
  double value = 0.0;
};

struct SvmParams {
  double C = 1.0;
  SvmGamma gamma;
  /// Only "rbf" is supported.
  std::string kernel = "rbf";
  /// Stopping gap on the maximal violating pair.
  double tol = 1e-4;
  /// 0 selects max(1e7, 100 N).
  long max_iter = 0;
  bool probability = true;
  int platt_folds = 5;
};

/// Dual solution over the training rows.
struct SmoSolution {
  Vector alpha;
  /// Offset b in f(x) = sum_i alpha_i y_i K(x_i, x) + b.
  double bias = 0.0;
  long iterations = 0;
  bool converged = false;
  double final_gap = 0.0;
};

struct SvmModel {
  SvmParams params;
  double gamma = 0.0;
  Matrix support;
  /// alpha_i * y_i for each support vector.
  Vector dual_coef;
  double bias = 0.0;
  bool has_platt = false;
  /// P(y = 1 | f) = 1 / (1 + exp(A f + B)).
  double platt_a = 0.0;
  double platt_b = 0.0;
  long iterations = 0;
};

/// Raised when SMO hits its iteration cap; carries the model built from the
/// last iterate.
class SvmConvergenceError : public ConvergenceError {
 public:
  SvmConvergenceError(const std::string& what, SvmModel best)
      : ConvergenceError(what), best_(std::move(best)) {}
  const SvmModel& best_iterate() const noexcept { return best_; }

 private:
  SvmModel best_;
};

void validate(const SvmParams& params);

/// Resolves "scale" (1 / (d var(X))) and "auto" (1 / d).
double resolve_gamma(const SvmGamma& gamma, const Matrix& X);

double rbf_kernel(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                  double gamma);

/// Second-order working-set SMO for the C-SVC dual with labels in {-1, +1}.
SmoSolution smo_solve(const Matrix& X, const std::vector<int>& signs, double C, double gamma,
                      double tol, long max_iter);

/// Largest KKT violation of `alpha` given training decision values f(x_i).
double kkt_max_violation(const Vector& alpha, const std::vector<int>& signs,
                         const Vector& decision, double C, double tau);

/// Fits the dual and, when params.probability, a Platt sigmoid on
/// out-of-fold decision values. `seed` drives the fold assignment.
SvmModel svm_rbf_fit(const Matrix& X, const Labels& y, const SvmParams& params,
                     std::uint64_t seed);

Vector svm_decision(const SvmModel& model, const Matrix& X);
Matrix svm_predict_proba(const SvmModel& model, const Matrix& X);

/// Newton fit of the Platt sigmoid with prior-corrected targets. Returns {A, B}.
std::pair<double, double> platt_fit(const Vector& decision, const Labels& y);

}  // namespace lobster::learners
