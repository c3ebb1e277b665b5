#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lobster/ingest/dataset.hpp"

namespace lobster::eval {

/// Individual-level train/test partition stratified by sex x age.
struct SplitPlan {
  std::vector<std::string> train_groups;
  std::vector<std::string> test_groups;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

/// Per stratum, max(1, round(test_fraction * n)) individuals go to test,
/// capped so at least one stays in training. `row_labels` may repeat
/// individuals (one entry per segment). Throws ValidationError when a stratum
/// has fewer than two individuals or an individual appears in two strata.
SplitPlan group_stratified_split(const std::vector<ingest::IndividualLabels>& row_labels,
                                 double test_fraction, std::uint64_t seed);

struct RowSplit {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};

/// Maps a plan onto rows by group id. Throws DataError when a row's group is
/// on neither side or on both.
RowSplit split_rows(const SplitPlan& plan, const std::vector<std::string>& row_groups);

/// Throws DataError if any group id appears on both sides.
void assert_group_disjoint(const std::vector<std::string>& row_groups,
                           const std::vector<Eigen::Index>& a, const std::vector<Eigen::Index>& b);

/// Fold id (0..K-1) per row. Classes are dealt round-robin after a seeded
/// shuffle, so each fold's class counts differ by at most one. With `groups`
/// whole groups are dealt instead (each group must carry a single label).
/// Throws ValidationError when K < 2 or K exceeds the minority class count
/// (counted in groups when grouped).
std::vector<int> stratified_kfold(const Labels& y, int K, std::uint64_t seed,
                                  const std::vector<std::string>* groups = nullptr);

}  // namespace lobster::eval
