#include "lobster/eval/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "lobster/common/error.hpp"
#include "lobster/common/rng.hpp"

namespace lobster::eval {

SplitPlan group_stratified_split(const std::vector<ingest::IndividualLabels>& row_labels,
                                 double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("test fraction must lie in (0, 1)");
  }
  if (row_labels.empty()) throw ValidationError("cannot split an empty dataset");
  std::map<std::string, std::pair<Sex, Age>> stratum_of;
  for (const auto& l : row_labels) {
    auto [it, inserted] = stratum_of.emplace(l.individual_id, std::make_pair(l.sex, l.age));
    if (!inserted && it->second != std::make_pair(l.sex, l.age)) {
      throw ValidationError("individual " + l.individual_id + " appears in two strata");
    }
  }
  std::map<std::pair<int, int>, std::vector<std::string>> strata;
  for (const auto& [id, s] : stratum_of) {
    strata[{static_cast<int>(s.first), static_cast<int>(s.second)}].push_back(id);
  }

  SplitPlan plan;
  plan.test_fraction = test_fraction;
  plan.seed = seed;
  const Rng master(seed);
  for (auto& [key, ids] : strata) {
    if (ids.size() < 2) {
      throw ValidationError("stratum " + to_string(static_cast<Sex>(key.first)) + "/" +
                            to_string(static_cast<Age>(key.second)) +
                            " has a single individual; at least two are required");
    }
    Rng rng = master.split(static_cast<std::uint64_t>(key.first * 2 + key.second));
    rng.shuffle(ids);
    auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(ids.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, ids.size() - 1);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      (i < n_test ? plan.test_groups : plan.train_groups).push_back(ids[i]);
    }
  }
  std::sort(plan.train_groups.begin(), plan.train_groups.end());
  std::sort(plan.test_groups.begin(), plan.test_groups.end());
  return plan;
}

RowSplit split_rows(const SplitPlan& plan, const std::vector<std::string>& row_groups) {
  const std::set<std::string> train(plan.train_groups.begin(), plan.train_groups.end());
  const std::set<std::string> test(plan.test_groups.begin(), plan.test_groups.end());
  RowSplit out;
  for (std::size_t i = 0; i < row_groups.size(); ++i) {
    const bool a = train.count(row_groups[i]) > 0;
    const bool b = test.count(row_groups[i]) > 0;
    if (a == b) throw DataError("group " + row_groups[i] + " is not assigned to exactly one side");
    (a ? out.train : out.test).push_back(static_cast<Eigen::Index>(i));
  }
  assert_group_disjoint(row_groups, out.train, out.test);
  return out;
}

void assert_group_disjoint(const std::vector<std::string>& row_groups,
                           const std::vector<Eigen::Index>& a, const std::vector<Eigen::Index>& b) {
  std::set<std::string> left;
  for (auto i : a) left.insert(row_groups[static_cast<std::size_t>(i)]);
  for (auto i : b) {
    if (left.count(row_groups[static_cast<std::size_t>(i)])) {
      throw DataError("individual " + row_groups[static_cast<std::size_t>(i)] + " straddles a split");
    }
  }
}

std::vector<int> stratified_kfold(const Labels& y, int K, std::uint64_t seed,
                                  const std::vector<std::string>* groups) {
  if (K < 2) throw ValidationError("K-fold needs K >= 2");
  if (groups && groups->size() != y.size()) throw ValidationError("group count does not match labels");
  for (int label : y) {
    if (label != 0 && label != 1) throw ValidationError("labels must be binary 0/1");
  }
  // Units are rows, or whole groups in grouped mode.
  std::vector<std::vector<std::size_t>> units;
  std::vector<int> unit_label;
  if (groups) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < y.size(); ++i) {
      auto [it, inserted] = index.emplace((*groups)[i], units.size());
      if (inserted) {
        units.emplace_back();
        unit_label.push_back(y[i]);
      } else if (unit_label[it->second] != y[i]) {
        throw ValidationError("group " + (*groups)[i] + " mixes class labels");
      }
      units[it->second].push_back(i);
    }
  } else {
    for (std::size_t i = 0; i < y.size(); ++i) {
      units.push_back({i});
      unit_label.push_back(y[i]);
    }
  }
  std::vector<std::size_t> by_class[2];
  for (std::size_t u = 0; u < units.size(); ++u) by_class[unit_label[u]].push_back(u);
  const std::size_t minority = std::min(by_class[0].size(), by_class[1].size());
  if (static_cast<std::size_t>(K) > minority) {
    throw ValidationError(std::to_string(K) + " folds exceed the minority class count of " +
                          std::to_string(minority) + (groups ? " groups" : " rows"));
  }
  Rng rng(seed);
  std::vector<int> fold_of(y.size(), -1);
  std::size_t offset = 0;
  for (auto& members : by_class) {
    rng.shuffle(members);
    for (std::size_t r = 0; r < members.size(); ++r) {
      const int f = static_cast<int>((offset + r) % static_cast<std::size_t>(K));
      for (auto row : units[members[r]]) fold_of[row] = f;
    }
    offset += members.size();
  }
  return fold_of;
}

}  // namespace lobster::eval
