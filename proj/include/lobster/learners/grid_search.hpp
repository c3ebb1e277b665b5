#pragma once

#include <cstdint>
#include <vector>

#include "lobster/learners/model.hpp"

namespace lobster::learners {

struct GridCell {
  std::size_t index = 0;
  PipelineSpec spec;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double cost = 0.0;
};

struct GridResult {
  std::size_t best = 0;
  std::vector<GridCell> cells;
  double wall_seconds = 0.0;

  const GridCell& best_cell() const { return cells[best]; }
};

/// Accuracy of `spec` on every fold of `fold_of` (row -> fold id 0..K-1).
std::vector<double> cross_val_accuracy(const PipelineSpec& spec, const Matrix& X, const Labels& y,
                                       const std::vector<int>& fold_of, std::uint64_t seed);

/// Scores every candidate with the given fold assignment. The winner has the
/// highest mean accuracy; ties go to the lower inference cost, then the
/// earlier grid position. Cells run on up to `jobs` threads.
GridResult grid_search(const std::vector<PipelineSpec>& grid, const Matrix& X, const Labels& y,
                       const std::vector<int>& fold_of, std::uint64_t seed, int jobs = 1);

/// Index of the winning cell under the tie-break rule.
std::size_t select_best(const std::vector<GridCell>& cells);

}  // namespace lobster::learners
