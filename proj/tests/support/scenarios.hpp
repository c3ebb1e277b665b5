#pragma once
// Stacking scenarios shared by the unit and acceptance suites.

#include <cstdint>
#include <string>

#include "datasets.hpp"
#include "lobster/eval/metrics.hpp"
#include "lobster/eval/stacking.hpp"

namespace scenario {

/// Label = [a . x_left + b . x_right + noise > 0]; each half alone is a weak
/// predictor. Train and test drawn from the same generator.
struct Complementary {
  toy::Problem train;
  toy::Problem test;
};
Complementary complementary(std::uint64_t seed, Eigen::Index n_train = 400, Eigen::Index n_test = 400);

/// Logistic regression restricted to columns [first, first + count).
lobster::eval::BaseLearner column_learner(const std::string& id, Eigen::Index first, Eigen::Index count);

/// Records the exact rows it was fitted on as its state.
lobster::eval::BaseLearner spy_learner(const std::string& id);

/// Zeroes each fold's rows in turn, refits the stack, and checks the spy's
/// fitted state for that fold is unchanged. Returns a description of the
/// first leak, or an empty string.
std::string leakage_witness(const toy::Problem& data, int K, std::uint64_t seed);

/// Every row has exactly one fold origin in [0, K), the fold holding it out;
/// OOF entries are in [0, 1] and equal the fold model's prediction.
std::string oof_structure(const lobster::eval::StackedModel& model, const lobster::Matrix& X);

struct ComplementaryOutcome {
  double best_base = 0.0;
  double average = 0.0;
  double majority = 0.0;
  double stacked = 0.0;
};
ComplementaryOutcome run_complementary(std::uint64_t seed);

}  // namespace scenario
