#pragma once
// Small seeded toy problems.

#include <algorithm>
#include <cstdint>

#include "lobster/common/rng.hpp"
#include "lobster/common/types.hpp"

namespace toy {

using lobster::Labels;
using lobster::Matrix;

struct Problem {
  Matrix X;
  Labels y;
};

/// Two Gaussian blobs at -sep/2 and +sep/2 along every axis, alternating labels.
inline Problem blobs(Eigen::Index n, Eigen::Index d, double sep, std::uint64_t seed, double sd = 1.0) {
  lobster::Rng rng(seed);
  Problem p{Matrix(n, d), Labels(static_cast<std::size_t>(n))};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    p.y[static_cast<std::size_t>(i)] = label;
    for (Eigen::Index j = 0; j < d; ++j) p.X(i, j) = (label ? 0.5 : -0.5) * sep + sd * rng.normal();
  }
  return p;
}

/// Label is the sign of a random linear function plus label noise.
inline Problem noisy_linear(Eigen::Index n, Eigen::Index d, double flip, std::uint64_t seed) {
  lobster::Rng rng(seed);
  Problem p{Matrix(n, d), Labels(static_cast<std::size_t>(n))};
  lobster::Vector w(d);
  for (auto& v : w) v = rng.normal();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) p.X(i, j) = rng.normal();
    int label = p.X.row(i).dot(w) > 0.0 ? 1 : 0;
    if (rng.uniform() < flip) label = 1 - label;
    p.y[static_cast<std::size_t>(i)] = label;
  }
  if (std::count(p.y.begin(), p.y.end(), 1) == 0) p.y[0] = 1;
  if (std::count(p.y.begin(), p.y.end(), 0) == 0) p.y[0] = 0;
  return p;
}

}  // namespace toy
