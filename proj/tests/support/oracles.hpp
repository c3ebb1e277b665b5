#pragma once
// Brute-force reference implementations used to cross-check the library.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lobster/common/types.hpp"
#include "lobster/features/mfcc.hpp"
#include "lobster/learners/svm.hpp"
#include "lobster/neural/cnn.hpp"

namespace oracle {

using lobster::Labels;
using lobster::Matrix;
using lobster::Vector;

/// MFCC frames from direct DFT sums, explicit triangle filters and explicit
/// DCT-II sums. Shares no code with the library front-end. Not thread-safe.
Matrix naive_mfcc(const std::vector<double>& segment, const lobster::features::MfccConfig& config);

/// AUC in percent by counting every (positive, negative) pair; ties count 1/2.
double pair_count_auc(const Labels& y, const std::vector<double>& scores);

/// Second implementation of the paired bootstrap resampling loop.
struct BootstrapRef {
  double lo = 0.0;
  double hi = 0.0;
  double p = 1.0;
  long redraws = 0;
};
BootstrapRef reference_bootstrap(const std::vector<double>& a, const std::vector<double>& b,
                                 const Labels& y, int n_boot, std::uint64_t seed, double level);

/// Largest relative error between an analytic gradient and central
/// differences of `loss` at every coordinate. Relative error uses
/// |a - n| / max(1e-6 absolute floor, |a|, |n|).
double max_gradient_error(const std::function<double(const Vector&)>& loss, const Vector& theta,
                          const Vector& analytic, double h);

struct GradientAudit {
  double worst = 0.0;
  /// Coordinates that only agreed after shrinking the step.
  int refined = 0;
};

/// For piecewise-smooth losses (ReLU, max-pool). A coordinate whose error at
/// `h` exceeds `tol` is retried at h/10 and h/100, since a kink closer than h
/// to theta corrupts the central difference. The smallest error is kept.
GradientAudit piecewise_gradient_error(const std::function<double(const Vector&)>& loss, const Vector& theta,
                                       const Vector& analytic, double h, double tol);

/// KKT audit computed from scratch: recomputes f(x_i) with explicit kernel
/// sums. Returns the largest shortfall: 1 - yf at alpha = 0, |yf - 1| for
/// interior alpha, yf - 1 at alpha = C. The audit passes when it is <= tau.
double kkt_audit(const Matrix& X, const std::vector<int>& signs, const Vector& alpha, double bias,
                 double C, double gamma);

/// Gini gain of splitting `rows` of column `feature` at `threshold`, computed
/// from raw counts.
double gini_gain_counts(const Matrix& X, const Labels& y, const std::vector<std::size_t>& rows,
                        int feature, double threshold);

/// Valid-mode dilated cross-correlation by triple loop. Input is length x
/// channels (time-major), weights [(f * k + j) * cin + c].
std::vector<double> naive_conv1d(const std::vector<double>& input, int length, int cin,
                                 const std::vector<double>& weights, const std::vector<double>& bias,
                                 int filters, int kernel, int dilation);

/// Random binary labels with both classes present.
Labels random_labels(std::size_t n, std::uint64_t seed);

}  // namespace oracle
