#include "lobster/learners/tree.hpp"

#include <algorithm>
#include <numeric>

#include "lobster/common/error.hpp"

namespace lobster::learners {

int DecisionTree::leaf_index(const Eigen::Ref<const Vector>& x) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    i = x(n.feature) <= n.threshold ? n.left : n.right;
  }
  return i;
}

int DecisionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.feature >= 0) {
      d[static_cast<std::size_t>(n.left)] = d[i] + 1;
      d[static_cast<std::size_t>(n.right)] = d[i] + 1;
    }
    best = std::max(best, d[i]);
  }
  return best;
}

nlohmann::json to_json(const DecisionTree& tree) {
  nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                 left = nlohmann::json::array(), right = nlohmann::json::array(),
                 value = nlohmann::json::array(), count = nlohmann::json::array();
  for (const auto& n : tree.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
    count.push_back(n.n_samples);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right},     {"value", value},         {"n_samples", count}};
}

DecisionTree tree_from_json(const nlohmann::json& node) {
  DecisionTree t;
  const auto& f = node.at("feature");
  t.nodes.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto& n = t.nodes[i];
    n.feature = f[i].get<int>();
    n.threshold = node.at("threshold")[i].get<double>();
    n.left = node.at("left")[i].get<int>();
    n.right = node.at("right")[i].get<int>();
    n.value = node.at("value")[i].get<double>();
    n.n_samples = node.at("n_samples")[i].get<std::size_t>();
    if (n.feature >= 0 && (n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i) ||
                           n.left >= static_cast<int>(f.size()) ||
                           n.right >= static_cast<int>(f.size()))) {
      throw DataError("tree node has invalid child indices");
    }
  }
  if (t.nodes.empty()) throw DataError("empty tree");
  return t;
}

double gini(double n_pos, double n) {
  if (n <= 0.0) return 0.0;
  const double p = n_pos / n;
  return 2.0 * p * (1.0 - p);
}

double gini_gain(const Matrix& X, const Labels& y, const std::vector<std::size_t>& rows,
                 int feature, double threshold) {
  double n = 0, pos = 0, nl = 0, pl = 0;
  for (auto r : rows) {
    n += 1;
    pos += y[r];
    if (X(static_cast<Eigen::Index>(r), feature) <= threshold) {
      nl += 1;
      pl += y[r];
    }
  }
  const double nr = n - nl, pr = pos - pl;
  return gini(pos, n) - (nl / n) * gini(pl, nl) - (nr / n) * gini(pr, nr);
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = -1.0;
};

struct CartBuilder {
  const Matrix& X;
  const Labels& y;
  const CartParams& params;
  Rng& rng;
  DecisionTree tree;

  int grow(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double pos = 0;
    for (auto r : rows) pos += y[r];
    const auto n = static_cast<double>(rows.size());
    {
      auto& node = tree.nodes.back();
      node.value = pos / n;
      node.n_samples = rows.size();
      node.score = gini(pos, n);
    }
    const bool pure = pos == 0.0 || pos == n;
    const bool depth_cap = params.max_depth && depth >= *params.max_depth;
    if (pure || depth_cap || rows.size() < static_cast<std::size_t>(params.min_samples_split)) {
      return id;
    }

    const int d = static_cast<int>(X.cols());
    std::vector<int> features(static_cast<std::size_t>(d));
    std::iota(features.begin(), features.end(), 0);
    if (params.max_features > 0 && params.max_features < d) {
      // Partial Fisher-Yates keeps the draw count fixed per node.
      for (int i = 0; i < params.max_features; ++i) {
        const auto j = static_cast<std::size_t>(i) + rng.below(static_cast<std::size_t>(d - i));
        std::swap(features[static_cast<std::size_t>(i)], features[j]);
      }
      features.resize(static_cast<std::size_t>(params.max_features));
      std::sort(features.begin(), features.end());
    }

    const double parent = gini(pos, n);
    const auto min_leaf = static_cast<std::size_t>(params.min_samples_leaf);
    Split best;
    std::vector<std::pair<double, int>> col(rows.size());
    for (int f : features) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        col[i] = {X(static_cast<Eigen::Index>(rows[i]), f), y[rows[i]]};
      }
      std::sort(col.begin(), col.end());
      double left_pos = 0;
      for (std::size_t i = 0; i + 1 < col.size(); ++i) {
        left_pos += col[i].second;
        if (col[i].first == col[i + 1].first) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = col.size() - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double gain = parent - (static_cast<double>(nl) / n) * gini(left_pos, static_cast<double>(nl)) -
                            (static_cast<double>(nr) / n) * gini(pos - left_pos, static_cast<double>(nr));
        if (gain > best.gain) {
          best.gain = gain;
          best.feature = f;
          best.threshold = 0.5 * (col[i].first + col[i + 1].first);
          // Guard against the midpoint rounding onto the upper value.
          if (!(best.threshold < col[i + 1].first)) best.threshold = col[i].first;
        }
      }
    }
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (X(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    tree.nodes[static_cast<std::size_t>(id)].feature = best.feature;
    tree.nodes[static_cast<std::size_t>(id)].threshold = best.threshold;
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    tree.nodes[static_cast<std::size_t>(id)].left = l;
    tree.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }
};

struct BoostBuilder {
  const Matrix& X;
  const Vector& g;
  const Vector& h;
  const std::vector<int>& features;
  const BoostTreeParams& params;
  DecisionTree tree;

  int grow(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double G = 0, H = 0;
    for (auto r : rows) {
      G += g(static_cast<Eigen::Index>(r));
      H += h(static_cast<Eigen::Index>(r));
    }
    const double lambda = params.reg_lambda;
    tree.nodes.back().value = -G / (H + lambda);
    tree.nodes.back().n_samples = rows.size();
    if (depth >= params.max_depth || rows.size() < 2) return id;

    const double parent = G * G / (H + lambda);
    Split best;
    best.gain = 0.0;
    std::vector<std::size_t> order(rows);
    for (int f : features) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double xa = X(static_cast<Eigen::Index>(a), f), xb = X(static_cast<Eigen::Index>(b), f);
        return xa < xb || (xa == xb && a < b);
      });
      double GL = 0, HL = 0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        GL += g(static_cast<Eigen::Index>(order[i]));
        HL += h(static_cast<Eigen::Index>(order[i]));
        const double xi = X(static_cast<Eigen::Index>(order[i]), f);
        const double xn = X(static_cast<Eigen::Index>(order[i + 1]), f);
        if (xi == xn) continue;
        const double GR = G - GL, HR = H - HL;
        if (HL < params.min_child_weight || HR < params.min_child_weight) continue;
        const double gain =
            0.5 * (GL * GL / (HL + lambda) + GR * GR / (HR + lambda) - parent);
        if (gain > best.gain) {
          best.gain = gain;
          best.feature = f;
          best.threshold = 0.5 * (xi + xn);
          if (!(best.threshold < xn)) best.threshold = xi;
        }
      }
    }
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (X(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? left : right).push_back(r);
    }
    tree.nodes[static_cast<std::size_t>(id)].feature = best.feature;
    tree.nodes[static_cast<std::size_t>(id)].threshold = best.threshold;
    tree.nodes[static_cast<std::size_t>(id)].score = best.gain;
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    tree.nodes[static_cast<std::size_t>(id)].left = l;
    tree.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }
};

}  // namespace

DecisionTree build_cart(const Matrix& X, const Labels& y, const std::vector<std::size_t>& rows,
                        const CartParams& params, Rng& rng) {
  if (rows.empty()) throw ValidationError("cannot grow a tree on an empty row set");
  CartBuilder b{X, y, params, rng, {}};
  b.grow(rows, 0);
  return std::move(b.tree);
}

DecisionTree build_boost_tree(const Matrix& X, const Vector& grad, const Vector& hess,
                              const std::vector<std::size_t>& rows,
                              const std::vector<int>& features, const BoostTreeParams& params) {
  if (rows.empty()) throw ValidationError("cannot grow a tree on an empty row set");
  BoostBuilder b{X, grad, hess, features, params, {}};
  b.grow(rows, 0);
  return std::move(b.tree);
}

}  // namespace lobster::learners
