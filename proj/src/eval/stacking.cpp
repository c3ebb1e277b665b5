#include "lobster/eval/stacking.hpp"

#include <algorithm>
#include <cmath>

#include "lobster/common/error.hpp"
#include "lobster/common/rng.hpp"
#include "lobster/eval/split.hpp"
#include "lobster/learners/common.hpp"

namespace lobster::eval {

BaseLearner pipeline_learner(const std::string& id, const learners::PipelineSpec& spec, int jobs) {
  return {id, [spec, jobs](const Matrix& X, const Labels& y, std::uint64_t seed) {
            auto model = std::make_shared<learners::TrainedModel>(learners::fit_model(spec, X, y, seed, jobs));
            FittedLearner f;
            f.predict_p1 = [model](const Matrix& Q) -> Vector { return model->predict_proba(Q).col(1); };
            return f;
          }};
}

Matrix logit_columns(const Matrix& p1) {
  return p1.unaryExpr([](double p) {
    const double q = std::clamp(p, 1e-7, 1.0 - 1e-7);
    return std::log(q / (1.0 - q));
  });
}

Matrix OofMatrix::meta_features() const {
  Matrix p1(rows.rows(), static_cast<Eigen::Index>(learner_ids.size()));
  for (Eigen::Index b = 0; b < p1.cols(); ++b) p1.col(b) = rows.col(2 * b + 1);
  return logit_columns(p1);
}

namespace {

[[noreturn]] void rethrow_with(const std::string& where) {
  try {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(where + ": " + e.what());
  } catch (const std::exception& e) {
    throw ConvergenceError(where + ": " + e.what());
  }
}

}  // namespace

StackedModel stack_fit(const std::vector<BaseLearner>& bases, const Matrix& X, const Labels& y,
                       const StackOptions& options, std::uint64_t seed) {
  if (bases.empty()) throw ValidationError("stacking needs at least one base learner");
  learners::check_training_set(X, y);
  const auto B = static_cast<Eigen::Index>(bases.size());
  const Rng master(seed);

  StackedModel sm;
  sm.meta = options.meta;
  for (const auto& b : bases) sm.learner_ids.push_back(b.id);
  sm.oof.learner_ids = sm.learner_ids;
  sm.oof.K = options.K;
  sm.oof.fold_of = stratified_kfold(y, options.K, master.split(0).seed(), options.groups);
  sm.oof.rows = Matrix::Constant(X.rows(), 2 * B, std::numeric_limits<double>::quiet_NaN());
  if (options.keep_fold_models) sm.fold_models.resize(static_cast<std::size_t>(options.K));

  for (int f = 0; f < options.K; ++f) {
    std::vector<Eigen::Index> tr, te;
    Labels ytr;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (sm.oof.fold_of[i] == f) {
        te.push_back(static_cast<Eigen::Index>(i));
      } else {
        tr.push_back(static_cast<Eigen::Index>(i));
        ytr.push_back(y[i]);
      }
    }
    if (options.groups) assert_group_disjoint(*options.groups, tr, te);
    const Matrix Xtr = X(tr, Eigen::all);
    const Matrix Xte = X(te, Eigen::all);
    for (Eigen::Index b = 0; b < B; ++b) {
      const auto& base = bases[static_cast<std::size_t>(b)];
      FittedLearner fitted;
      Vector p1;
      try {
        fitted = base.fit(Xtr, ytr, Rng::derive_seed(master.split(1 + static_cast<std::uint64_t>(b)).seed(),
                                                     static_cast<std::uint64_t>(f)));
        p1 = fitted.predict_p1(Xte);
      } catch (...) {
        rethrow_with("fold " + std::to_string(f) + " learner " + base.id);
      }
      for (std::size_t r = 0; r < te.size(); ++r) {
        sm.oof.rows(te[r], 2 * b) = 1.0 - p1(static_cast<Eigen::Index>(r));
        sm.oof.rows(te[r], 2 * b + 1) = p1(static_cast<Eigen::Index>(r));
      }
      if (options.keep_fold_models) sm.fold_models[static_cast<std::size_t>(f)].push_back(std::move(fitted));
    }
  }

  if (options.meta == MetaKind::kLogReg) {
    sm.meta_model = learners::logreg_fit_cv(sm.oof.meta_features(), y, learners::default_l2_grid(), options.K,
                                            master.split(0x3e7a).seed());
  }

  for (Eigen::Index b = 0; b < B; ++b) {
    const auto& base = bases[static_cast<std::size_t>(b)];
    try {
      sm.bases.push_back(base.fit(X, y, master.split(1000 + static_cast<std::uint64_t>(b)).seed()));
    } catch (...) {
      rethrow_with("full refit learner " + base.id);
    }
  }
  return sm;
}

Matrix StackedModel::base_probabilities(const Matrix& X) const {
  Matrix p(X.rows(), static_cast<Eigen::Index>(bases.size()));
  for (std::size_t b = 0; b < bases.size(); ++b) p.col(static_cast<Eigen::Index>(b)) = bases[b].predict_p1(X);
  return p;
}

Vector StackedModel::meta_p1(const Matrix& base_p1) const {
  const Matrix z = logit_columns(base_p1);
  Vector margin;
  if (meta == MetaKind::kIdentity) {
    margin = z.rowwise().mean();
  } else {
    margin = (z * meta_model.weights).array() + meta_model.intercept;
  }
  return margin.unaryExpr([](double m) { return learners::sigmoid(m); });
}

Vector StackedModel::predict_p1(const Matrix& X) const { return meta_p1(base_probabilities(X)); }

Labels StackedModel::predict(const Matrix& X) const {
  const Vector p = predict_p1(X);
  Labels out(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) out[static_cast<std::size_t>(i)] = p(i) > 0.5 ? 1 : 0;
  return out;
}

std::vector<MetricRow> stacking_ablation(const StackedModel& model, const Matrix& X_test, const Labels& y_test,
                                         int mfcc) {
  const Matrix P = model.base_probabilities(X_test);
  const Vector avg = P.rowwise().mean();
  const auto n = static_cast<std::size_t>(P.rows());
  const double B = static_cast<double>(P.cols());

  Labels pred_avg(n), pred_vote(n);
  std::vector<double> vote_score(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    double votes = 0;
    for (Eigen::Index b = 0; b < P.cols(); ++b) votes += P(r, b) > 0.5 ? 1.0 : 0.0;
    pred_avg[i] = avg(r) > 0.5 ? 1 : 0;
    if (2 * votes == B) {
      pred_vote[i] = pred_avg[i];
    } else {
      pred_vote[i] = 2 * votes > B ? 1 : 0;
    }
    // Vote share, with the averaged probability as a sub-vote tie-breaker for AUC.
    vote_score[i] = votes / B + 1e-3 * (avg(r) - 0.5) / B;
  }
  const Vector stacked = model.meta_p1(P);
  Labels pred_stack(n);
  for (std::size_t i = 0; i < n; ++i) pred_stack[i] = stacked(static_cast<Eigen::Index>(i)) > 0.5 ? 1 : 0;

  auto row = [&](const std::string& name, const Labels& pred, std::span<const double> score) {
    MetricRow m = confusion_and_rates(y_test, pred);
    m.model = name;
    m.mfcc = mfcc;
    m.auc_roc = roc_auc(y_test, score);
    m.it_ms = std::numeric_limits<double>::quiet_NaN();
    return m;
  };
  return {row("average", pred_avg, std::span<const double>(avg.data(), n)),
          row("majority_vote", pred_vote, vote_score),
          row("stacked", pred_stack, std::span<const double>(stacked.data(), n))};
}

}  // namespace lobster::eval
