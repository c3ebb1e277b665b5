#pragma once

#include <string>

#include "lobster/common/types.hpp"

namespace lobster::neural {

enum class OptimizerKind { kAdam, kRmsprop };

OptimizerKind parse_optimizer(const std::string& name);
std::string to_string(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  /// Adam epsilon.
  double epsilon = 1e-8;
  double rho = 0.9;
  /// RMSprop epsilon.
  double rms_epsilon = 1e-7;
};

/// Stateful first-order optimiser over a flat parameter vector.
///
/// Adam: m = b1 m + (1-b1) g, v = b2 v + (1-b2) g^2,
///       theta -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
/// RMSprop: v = rho v + (1-rho) g^2, theta -= lr * g / (sqrt(v) + eps).
class Optimizer {
 public:
  Optimizer(const OptimizerConfig& config, Eigen::Index n_params);

  void step(Vector& params, const Vector& grad);
  long steps() const noexcept { return t_; }
  const OptimizerConfig& config() const noexcept { return config_; }

 private:
  OptimizerConfig config_;
  Vector m_;
  Vector v_;
  long t_ = 0;
};

}  // namespace lobster::neural
