#include "scenarios.hpp"

#include <algorithm>
#include <cmath>

#include "lobster/learners/mlp.hpp"

namespace scenario {

using namespace lobster;

Complementary complementary(std::uint64_t seed, Eigen::Index n_train, Eigen::Index n_test) {
  Rng rng(seed);
  auto draw = [&](Eigen::Index n) {
    toy::Problem p{Matrix(n, 4), Labels(static_cast<std::size_t>(n))};
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < 4; ++j) p.X(i, j) = rng.normal();
      const double z = p.X(i, 0) + p.X(i, 1) + p.X(i, 2) - p.X(i, 3) + 0.3 * rng.normal();
      p.y[static_cast<std::size_t>(i)] = z > 0.0 ? 1 : 0;
    }
    return p;
  };
  Complementary c;
  c.train = draw(n_train);
  c.test = draw(n_test);
  return c;
}

eval::BaseLearner column_learner(const std::string& id, Eigen::Index first, Eigen::Index count) {
  return {id, [first, count](const Matrix& X, const Labels& y, std::uint64_t) {
            const auto m = learners::logreg_fit(X.middleCols(first, count), y, learners::LogRegParams{1e-3});
            eval::FittedLearner f;
            f.predict_p1 = [m, first, count](const Matrix& Q) -> Vector {
              return learners::logreg_predict_proba(m, Q.middleCols(first, count)).col(1);
            };
            f.state = {{"w", std::vector<double>(m.weights.data(), m.weights.data() + m.weights.size())},
                       {"b", m.intercept}};
            return f;
          }};
}

eval::BaseLearner spy_learner(const std::string& id) {
  return {id, [](const Matrix& X, const Labels& y, std::uint64_t seed) {
            eval::FittedLearner f;
            nlohmann::json rows = nlohmann::json::array();
            for (Eigen::Index i = 0; i < X.rows(); ++i) {
              std::vector<double> r(static_cast<std::size_t>(X.cols()));
              for (Eigen::Index j = 0; j < X.cols(); ++j) r[static_cast<std::size_t>(j)] = X(i, j);
              rows.push_back(r);
            }
            f.state = {{"rows", rows}, {"labels", y}, {"seed", seed}};
            const double mean = X.mean();
            f.predict_p1 = [mean](const Matrix& Q) -> Vector {
              Vector p(Q.rows());
              for (Eigen::Index i = 0; i < Q.rows(); ++i) p(i) = 1.0 / (1.0 + std::exp(-(Q.row(i).sum() - mean)));
              return p;
            };
            return f;
          }};
}

std::string leakage_witness(const toy::Problem& data, int K, std::uint64_t seed) {
  eval::StackOptions opt;
  opt.K = K;
  opt.keep_fold_models = true;
  const auto base = eval::stack_fit({spy_learner("spy")}, data.X, data.y, opt, seed);
  for (int f = 0; f < K; ++f) {
    Matrix masked = data.X;
    for (Eigen::Index i = 0; i < masked.rows(); ++i) {
      if (base.oof.fold_of[static_cast<std::size_t>(i)] == f) masked.row(i).setZero();
    }
    const auto again = eval::stack_fit({spy_learner("spy")}, masked, data.y, opt, seed);
    if (again.oof.fold_of != base.oof.fold_of) return "fold assignment depends on features";
    if (again.fold_models[static_cast<std::size_t>(f)][0].state != base.fold_models[static_cast<std::size_t>(f)][0].state) {
      return "fold " + std::to_string(f) + " model saw its held-out rows";
    }
  }
  return {};
}

std::string oof_structure(const eval::StackedModel& model, const Matrix& X) {
  const auto& oof = model.oof;
  const auto B = static_cast<Eigen::Index>(oof.learner_ids.size());
  if (oof.rows.rows() != X.rows() || oof.rows.cols() != 2 * B) return "OOF shape mismatch";
  if (oof.fold_of.size() != static_cast<std::size_t>(X.rows())) return "fold assignment size mismatch";
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const int f = oof.fold_of[static_cast<std::size_t>(i)];
    if (f < 0 || f >= oof.K) return "row " + std::to_string(i) + " has no valid fold";
    for (Eigen::Index b = 0; b < B; ++b) {
      const double p0 = oof.rows(i, 2 * b), p1 = oof.rows(i, 2 * b + 1);
      if (!(p0 >= 0.0 && p1 <= 1.0 && std::abs(p0 + p1 - 1.0) < 1e-9)) return "OOF entry out of range";
      if (!model.fold_models.empty()) {
        const double expect = model.fold_models[static_cast<std::size_t>(f)][static_cast<std::size_t>(b)].predict_p1(X.row(i))(0);
        if (expect != p1) return "row " + std::to_string(i) + " not filled by its held-out fold";
      }
    }
  }
  return {};
}

ComplementaryOutcome run_complementary(std::uint64_t seed) {
  const auto c = complementary(seed);
  const std::vector<eval::BaseLearner> bases{column_learner("left", 0, 2), column_learner("right", 2, 2)};
  const auto model = eval::stack_fit(bases, c.train.X, c.train.y, eval::StackOptions{}, seed);
  const auto rows = eval::stacking_ablation(model, c.test.X, c.test.y);
  ComplementaryOutcome out;
  const Matrix P = model.base_probabilities(c.test.X);
  for (Eigen::Index b = 0; b < P.cols(); ++b) {
    Labels pred;
    for (Eigen::Index i = 0; i < P.rows(); ++i) pred.push_back(P(i, b) > 0.5 ? 1 : 0);
    out.best_base = std::max(out.best_base, eval::confusion_and_rates(c.test.y, pred).accuracy);
  }
  for (const auto& r : rows) {
    if (r.model == "average") out.average = r.accuracy;
    if (r.model == "majority_vote") out.majority = r.accuracy;
    if (r.model == "stacked") out.stacked = r.accuracy;
  }
  return out;
}

}  // namespace scenario
