#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lobster/common/types.hpp"
#include "lobster/neural/layers.hpp"
#include "lobster/neural/optimizer.hpp"

namespace lobster::neural {

struct ConvBlock {
  int filters = 64;
  int kernel = 3;
  int dilation = 1;
  /// 0 selects 2 when the remaining layers still fit, else 1.
  int pool = 2;
};

enum class DilationSchedule { kExponential, kLinear };

DilationSchedule parse_dilation_schedule(const std::string& name);

/// Conv -> ReLU -> MaxPool per block, then Flatten -> Dense(ReLU) -> Dense(1, sigmoid).
struct CnnSpec {
  std::vector<ConvBlock> layers{ConvBlock{}};
  int dense_units = 128;
  OptimizerConfig optimizer;
  int batch_size = 32;
  int epochs = 10;
  bool early_stopping = true;
  int patience = 2;
  double validation_fraction = 0.1;
  /// Marks the dilated family even when every dilation is 1 (one layer).
  bool dilated_variant = false;

  bool dilated() const;
};

void validate(const CnnSpec& spec);

/// Exponential {1, 2, 4, 8} or linear {1, 2, 3, 4}, truncated to n_layers.
std::vector<int> dcnn_dilation_schedule(int n_layers,
                                        DilationSchedule schedule = DilationSchedule::kExponential);

/// 1 + sum (kernel - 1) * dilation over stacked unpooled layers.
int receptive_field(int kernel, const std::vector<int>& dilations);

/// Replaces every auto (0) pool size for the given input length. Throws
/// ValidationError when the stack cannot fit.
CnnSpec resolve_auto_pool(const CnnSpec& spec, int input_length);

/// Default n-layer variant for a given input length: filters double from 64
/// per layer, kernel 3, pool 2 wherever the remaining layers still fit.
CnnSpec default_cnn_spec(int n_layers, bool dilated, int input_length,
                         DilationSchedule schedule = DilationSchedule::kExponential);

struct LayerPlan {
  ConvShape conv;
  int pool = 1;
  int in_length = 0;
  int conv_length = 0;
  int out_length = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
};

/// Shapes and parameter offsets for a spec applied to a given input length.
struct CnnLayout {
  int input_length = 0;
  std::vector<LayerPlan> convs;
  int flat = 0;
  int dense_units = 0;
  std::size_t dense_w = 0;
  std::size_t dense_b = 0;
  std::size_t out_w = 0;
  std::size_t out_b = 0;
  std::size_t total = 0;
};

/// Throws ValidationError when any layer underflows its input.
CnnLayout plan_cnn(const CnnSpec& spec, int input_length);

/// Glorot-uniform weights, zero biases.
Vector cnn_init(const CnnLayout& layout, std::uint64_t seed);

/// Sigmoid outputs, one per row of X.
Vector cnn_forward(const CnnLayout& layout, const Vector& params, const Matrix& X);

/// Mean binary cross-entropy and, when grad is non-null, its gradient.
double cnn_loss_and_gradient(const CnnLayout& layout, const Vector& params, const Matrix& X,
                             const Labels& y, Vector* grad);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct CnnModel {
  CnnSpec spec;
  CnnLayout layout;
  Vector params;
  std::vector<EpochLog> curve;
  int best_epoch = 0;
};

CnnModel train_cnn(const CnnSpec& spec, const Matrix& X, const Labels& y, std::uint64_t seed);
Matrix cnn_predict_proba(const CnnModel& model, const Matrix& X);

/// Layer-list syntax: {"layers":[{"filters","kernel","dilation","pool"}], "dense", ...}.
nlohmann::json to_json(const CnnSpec& spec);
CnnSpec cnn_spec_from_json(const nlohmann::json& node);

/// Display name such as "1D-DCNN (2 L)".
std::string display_name(const CnnSpec& spec);

}  // namespace lobster::neural
