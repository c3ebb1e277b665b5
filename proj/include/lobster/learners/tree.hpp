#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <json.hpp>

#include "lobster/common/rng.hpp"
#include "lobster/common/types.hpp"

namespace lobster::learners {

/// Flat binary tree node. Leaves have feature == -1. Rows with
/// x[feature] <= threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  std::size_t n_samples = 0;
  /// Gini for classification trees, split gain for boosted trees.
  double score = 0.0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  int leaf_index(const Eigen::Ref<const Vector>& x) const;
  double predict(const Eigen::Ref<const Vector>& x) const { return nodes[static_cast<std::size_t>(leaf_index(x))].value; }
  int depth() const;
};

nlohmann::json to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const nlohmann::json& node);

struct CartParams {
  std::optional<int> max_depth;
  int min_samples_leaf = 1;
  int min_samples_split = 2;
  /// Features sampled per split; 0 means all.
  int max_features = 0;
};

double gini(double n_pos, double n);

/// Gini gain of splitting `rows` (multiset, duplicates allowed) at `threshold`.
double gini_gain(const Matrix& X, const Labels& y, const std::vector<std::size_t>& rows,
                 int feature, double threshold);

/// Classification CART on the multiset `rows`. Leaf value is the class-1
/// fraction. Best split maximises Gini gain; ties go to the lowest feature
/// index, then the lowest threshold. Thresholds are midpoints between
/// consecutive distinct values.
DecisionTree build_cart(const Matrix& X, const Labels& y, const std::vector<std::size_t>& rows,
                        const CartParams& params, Rng& rng);

struct BoostTreeParams {
  int max_depth = 3;
  double reg_lambda = 1.0;
  double min_child_weight = 1.0;
};

/// Second-order regression tree on (gradient, hessian) pairs restricted to
/// `rows` and `features`. Leaf value -G / (H + lambda); split gain
/// 0.5 * (GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)), split only when positive.
DecisionTree build_boost_tree(const Matrix& X, const Vector& grad, const Vector& hess,
                              const std::vector<std::size_t>& rows,
                              const std::vector<int>& features, const BoostTreeParams& params);

}  // namespace lobster::learners
