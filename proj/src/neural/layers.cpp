#include "lobster/neural/layers.hpp"

#include <algorithm>
#include <string>

#include "lobster/common/error.hpp"

namespace lobster::neural {

Tensor1D::Tensor1D(int length_, int channels_, double fill)
    : length(length_), channels(channels_),
      data(static_cast<std::size_t>(length_) * static_cast<std::size_t>(channels_), fill) {}

Tensor1D as_sequence(const Eigen::Ref<const Vector>& values) {
  Tensor1D t(static_cast<int>(values.size()), 1);
  for (Eigen::Index i = 0; i < values.size(); ++i) t.data[static_cast<std::size_t>(i)] = values(i);
  return t;
}

int ConvShape::output_length(int input_length) const {
  if (kernel < 1 || dilation < 1 || filters < 1 || in_channels < 1) {
    throw ValidationError("convolution kernel, dilation, filters and channels must be >= 1");
  }
  const int out = input_length - (kernel - 1) * dilation;
  if (out < 1) {
    throw ValidationError("receptive field " + std::to_string(receptive_field()) +
                          " exceeds input length " + std::to_string(input_length));
  }
  return out;
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// L x (kernel * Cin) patch matrix; row t holds the dilated window at t.
RowMatrix im2col(const Tensor1D& input, const ConvShape& s, int L) {
  const int Cin = s.in_channels;
  RowMatrix cols(L, s.kernel * Cin);
  for (int t = 0; t < L; ++t) {
    for (int j = 0; j < s.kernel; ++j) {
      const double* x = &input.data[static_cast<std::size_t>(t + j * s.dilation) * static_cast<std::size_t>(Cin)];
      std::copy(x, x + Cin, &cols(t, j * Cin));
    }
  }
  return cols;
}

}  // namespace

Tensor1D conv1d_forward(const Tensor1D& input, const ConvShape& s, const double* w,
                        const double* b) {
  if (input.channels != s.in_channels) throw ValidationError("convolution channel mismatch");
  const int L = s.output_length(input.length);
  const int KC = s.kernel * s.in_channels;
  Tensor1D out(L, s.filters);
  const RowMatrix cols = im2col(input, s, L);
  Eigen::Map<const RowMatrix> W(w, s.filters, KC);
  Eigen::Map<RowMatrix> O(out.data.data(), L, s.filters);
  O.noalias() = cols * W.transpose();
  O.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b, s.filters);
  return out;
}

Tensor1D conv1d_backward(const Tensor1D& input, const ConvShape& s, const double* w,
                         const Tensor1D& grad_output, double* gw, double* gb) {
  const int L = grad_output.length;
  const int Cin = s.in_channels;
  const int KC = s.kernel * Cin;
  const RowMatrix cols = im2col(input, s, L);
  Eigen::Map<const RowMatrix> G(grad_output.data.data(), L, s.filters);
  Eigen::Map<const RowMatrix> W(w, s.filters, KC);
  Eigen::Map<RowMatrix> GW(gw, s.filters, KC);
  Eigen::Map<Eigen::RowVectorXd> GB(gb, s.filters);
  GW.noalias() += G.transpose() * cols;
  GB += G.colwise().sum();
  const RowMatrix dcols = G * W;
  Tensor1D grad_in(input.length, Cin);
  for (int t = 0; t < L; ++t) {
    for (int j = 0; j < s.kernel; ++j) {
      double* gi = &grad_in.data[static_cast<std::size_t>(t + j * s.dilation) * static_cast<std::size_t>(Cin)];
      const double* d = &dcols(t, j * Cin);
      for (int c = 0; c < Cin; ++c) gi[c] += d[c];
    }
  }
  return grad_in;
}

PoolResult maxpool1d(const Tensor1D& input, int pool) {
  if (pool < 1) throw ValidationError("pool size must be >= 1");
  const int L = input.length / pool;
  if (L < 1) throw ValidationError("pool size exceeds input length");
  PoolResult r{Tensor1D(L, input.channels), std::vector<int>(static_cast<std::size_t>(L) * static_cast<std::size_t>(input.channels))};
  for (int t = 0; t < L; ++t) {
    for (int c = 0; c < input.channels; ++c) {
      int best = t * pool;
      for (int i = 1; i < pool; ++i) {
        if (input.at(t * pool + i, c) > input.at(best, c)) best = t * pool + i;
      }
      r.output.at(t, c) = input.at(best, c);
      r.argmax[static_cast<std::size_t>(t) * static_cast<std::size_t>(input.channels) + static_cast<std::size_t>(c)] = best;
    }
  }
  return r;
}

Tensor1D maxpool1d_backward(const PoolResult& fwd, int input_length, const Tensor1D& grad_output) {
  Tensor1D g(input_length, grad_output.channels);
  for (int t = 0; t < grad_output.length; ++t) {
    for (int c = 0; c < grad_output.channels; ++c) {
      const int src = fwd.argmax[static_cast<std::size_t>(t) * static_cast<std::size_t>(grad_output.channels) + static_cast<std::size_t>(c)];
      g.at(src, c) += grad_output.at(t, c);
    }
  }
  return g;
}

void relu_inplace(Tensor1D& t) {
  for (auto& v : t.data) v = std::max(v, 0.0);
}

}  // namespace lobster::neural
