#include "lobster/neural/optimizer.hpp"

#include <cmath>

#include "lobster/common/error.hpp"

namespace lobster::neural {

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "rmsprop") return OptimizerKind::kRmsprop;
  throw ValidationError("unknown optimizer '" + name + "' (expected adam or rmsprop)");
}

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "rmsprop";
}

Optimizer::Optimizer(const OptimizerConfig& config, Eigen::Index n_params)
    : config_(config), m_(Vector::Zero(n_params)), v_(Vector::Zero(n_params)) {
  if (!(config.learning_rate >= 0.0)) throw ValidationError("learning rate must be >= 0");
}

void Optimizer::step(Vector& params, const Vector& grad) {
  if (grad.size() != params.size() || params.size() != m_.size()) {
    throw ValidationError("optimizer parameter/gradient size mismatch");
  }
  ++t_;
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::kAdam) {
    m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
    v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    params.array() -=
        lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + config_.epsilon);
  } else {
    v_ = config_.rho * v_ + (1.0 - config_.rho) * grad.cwiseProduct(grad);
    params.array() -= lr * grad.array() / (v_.array().sqrt() + config_.rms_epsilon);
  }
}

}  // namespace lobster::neural
