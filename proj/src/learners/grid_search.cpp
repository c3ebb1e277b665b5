#include "lobster/learners/grid_search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "lobster/common/error.hpp"
#include "lobster/common/parallel.hpp"
#include "lobster/common/rng.hpp"

namespace lobster::learners {
namespace {

int check_folds(const std::vector<int>& fold_of, const Labels& y) {
  if (fold_of.size() != y.size()) throw ValidationError("fold assignment does not match row count");
  int k = 0;
  for (int f : fold_of) {
    if (f < 0) throw ValidationError("negative fold id");
    k = std::max(k, f + 1);
  }
  if (k < 2) throw ValidationError("cross-validation needs at least 2 folds");
  for (int f = 0; f < k; ++f) {
    int test = 0, train_pos = 0, train_neg = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (fold_of[i] == f) ++test;
      else (y[i] ? train_pos : train_neg) += 1;
    }
    if (test == 0) throw ValidationError("fold " + std::to_string(f) + " is empty");
    if (train_pos == 0 || train_neg == 0) {
      throw ValidationError("fold " + std::to_string(f) + " leaves a single class for training");
    }
  }
  return k;
}

}  // namespace

std::vector<double> cross_val_accuracy(const PipelineSpec& spec, const Matrix& X, const Labels& y,
                                       const std::vector<int>& fold_of, std::uint64_t seed) {
  const int k = check_folds(fold_of, y);
  std::vector<double> scores;
  for (int f = 0; f < k; ++f) {
    std::vector<Eigen::Index> tr, te;
    Labels ytr, yte;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (fold_of[i] == f) {
        te.push_back(static_cast<Eigen::Index>(i));
        yte.push_back(y[i]);
      } else {
        tr.push_back(static_cast<Eigen::Index>(i));
        ytr.push_back(y[i]);
      }
    }
    const TrainedModel m = fit_model(spec, X(tr, Eigen::all), ytr, Rng::derive_seed(seed, static_cast<std::uint64_t>(f)));
    const Labels pred = m.predict(X(te, Eigen::all));
    int correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == yte[i];
    scores.push_back(static_cast<double>(correct) / static_cast<double>(pred.size()));
  }
  return scores;
}

std::size_t select_best(const std::vector<GridCell>& cells) {
  if (cells.empty()) throw ValidationError("empty grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const auto& a = cells[i];
    const auto& b = cells[best];
    if (a.mean_accuracy > b.mean_accuracy ||
        (a.mean_accuracy == b.mean_accuracy && a.cost < b.cost)) {
      best = i;
    }
  }
  return best;
}

GridResult grid_search(const std::vector<PipelineSpec>& grid, const Matrix& X, const Labels& y,
                       const std::vector<int>& fold_of, std::uint64_t seed, int jobs) {
  if (grid.empty()) throw ValidationError("grid must contain at least one candidate");
  check_folds(fold_of, y);
  const auto start = std::chrono::steady_clock::now();
  GridResult r;
  r.cells.resize(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    GridCell& c = r.cells[i];
    c.index = i;
    c.spec = grid[i];
    c.cost = inference_cost(grid[i], X.cols());
    c.fold_accuracy = cross_val_accuracy(grid[i], X, y, fold_of, seed);
    double sum = 0.0;
    for (double s : c.fold_accuracy) sum += s;
    c.mean_accuracy = sum / static_cast<double>(c.fold_accuracy.size());
    double ss = 0.0;
    for (double s : c.fold_accuracy) ss += (s - c.mean_accuracy) * (s - c.mean_accuracy);
    c.std_accuracy = std::sqrt(ss / static_cast<double>(c.fold_accuracy.size()));
  });
  r.best = select_best(r.cells);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace lobster::learners
