#pragma once

#include <cstddef>
#include <vector>

#include "lobster/common/types.hpp"

namespace lobster::neural {

/// length x channels grid stored time-major: data[t * channels + c].
struct Tensor1D {
  int length = 0;
  int channels = 0;
  std::vector<double> data;

  Tensor1D() = default;
  Tensor1D(int length, int channels, double fill = 0.0);

  double& at(int t, int c) { return data[static_cast<std::size_t>(t) * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)]; }
  double at(int t, int c) const { return data[static_cast<std::size_t>(t) * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)]; }
};

/// Single-channel tensor from a feature vector.
Tensor1D as_sequence(const Eigen::Ref<const Vector>& values);

/// Weights are indexed [(f * kernel + j) * in_channels + c].
struct ConvShape {
  int in_channels = 1;
  int filters = 1;
  int kernel = 3;
  int dilation = 1;

  std::size_t weight_count() const { return static_cast<std::size_t>(filters) * static_cast<std::size_t>(kernel) * static_cast<std::size_t>(in_channels); }
  int receptive_field() const { return (kernel - 1) * dilation + 1; }
  /// Valid-mode output length; throws ValidationError when the input is too short.
  int output_length(int input_length) const;
};

/// out[t][f] = b[f] + sum_{j,c} in[t + j*dilation][c] * w[f][j][c].
Tensor1D conv1d_forward(const Tensor1D& input, const ConvShape& shape, const double* weights,
                        const double* bias);

/// Accumulates into grad_weights / grad_bias; returns d loss / d input.
Tensor1D conv1d_backward(const Tensor1D& input, const ConvShape& shape, const double* weights,
                         const Tensor1D& grad_output, double* grad_weights, double* grad_bias);

struct PoolResult {
  Tensor1D output;
  /// Input time index chosen for each output cell (first maximum wins).
  std::vector<int> argmax;
};

/// Non-overlapping windows; a trailing remainder shorter than the pool is dropped.
PoolResult maxpool1d(const Tensor1D& input, int pool_size);
Tensor1D maxpool1d_backward(const PoolResult& forward, int input_length, const Tensor1D& grad_output);

void relu_inplace(Tensor1D& t);

}  // namespace lobster::neural
