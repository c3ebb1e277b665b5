#include <algorithm>
#include <cmath>
#include <set>

#include "../support/oracles.hpp"
#include "doctest.h"
#include "lobster/common/error.hpp"
#include "lobster/common/rng.hpp"
#include "lobster/eval/calibration.hpp"
#include "lobster/eval/metrics.hpp"
#include "lobster/eval/ranking.hpp"
#include "lobster/eval/split.hpp"
#include "lobster/eval/stats.hpp"
#include "lobster/eval/timing.hpp"

using namespace lobster;
using namespace lobster::eval;

namespace {

std::vector<ingest::IndividualLabels> population(int per_stratum, int segments_each) {
  std::vector<ingest::IndividualLabels> rows;
  int id = 0;
  for (auto sex : {Sex::kMale, Sex::kFemale})
    for (auto age : {Age::kAdult, Age::kJuvenile})
      for (int i = 0; i < per_stratum; ++i, ++id)
        for (int s = 0; s < segments_each; ++s) rows.push_back({"L" + std::to_string(id), sex, age});
  return rows;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("group split rounding rules") {
  const auto six = group_stratified_split(population(6, 3), 0.2, 1);
  CHECK(six.test_groups.size() == 4);
  CHECK(six.train_groups.size() == 20);
  const auto two = group_stratified_split(population(2, 1), 0.2, 1);
  CHECK(two.test_groups.size() == 4);
  CHECK(two.train_groups.size() == 4);
  CHECK_THROWS_AS(group_stratified_split(population(1, 1), 0.2, 1), ValidationError);
}

TEST_CASE("group split never straddles and covers strata") {
  const auto rows = population(5, 4);
  std::vector<std::string> groups;
  for (const auto& r : rows) groups.push_back(r.individual_id);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto plan = group_stratified_split(rows, 0.2, seed);
    const auto rs = split_rows(plan, groups);
    CHECK_NOTHROW(assert_group_disjoint(groups, rs.train, rs.test));
    std::set<std::pair<int, int>> train_strata, test_strata;
    for (auto i : rs.train) train_strata.insert({static_cast<int>(rows[static_cast<std::size_t>(i)].sex), static_cast<int>(rows[static_cast<std::size_t>(i)].age)});
    for (auto i : rs.test) test_strata.insert({static_cast<int>(rows[static_cast<std::size_t>(i)].sex), static_cast<int>(rows[static_cast<std::size_t>(i)].age)});
    CHECK(train_strata.size() == 4);
    CHECK(test_strata.size() == 4);
  }
  CHECK_THROWS_AS(assert_group_disjoint({"a", "a"}, {0}, {1}), DataError);
}

TEST_CASE("stratified kfold balance and feasibility") {
  Labels y(37);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = i % 3 == 0;
  const auto folds = stratified_kfold(y, 5, 9);
  for (int label : {0, 1}) {
    std::vector<int> counts(5, 0);
    for (std::size_t i = 0; i < y.size(); ++i) if (y[i] == label) ++counts[static_cast<std::size_t>(folds[i])];
    CHECK(*std::max_element(counts.begin(), counts.end()) - *std::min_element(counts.begin(), counts.end()) <= 1);
  }
  CHECK(stratified_kfold(y, 5, 9) == folds);
  CHECK_THROWS_AS(stratified_kfold(Labels{0, 0, 0, 1}, 2, 1), ValidationError);
  std::vector<std::string> g{"a", "a", "b", "b", "c", "d"};
  Labels gy{0, 0, 1, 1, 0, 1};
  const auto gf = stratified_kfold(gy, 2, 3, &g);
  CHECK(gf[0] == gf[1]);
  CHECK(gf[2] == gf[3]);
}

TEST_CASE("confusion-derived rates") {
  const auto r = confusion_and_rates({1, 1, 0, 0}, {1, 0, 0, 0});
  CHECK(r.precision == doctest::Approx(100.0));
  CHECK(r.recall == doctest::Approx(50.0));
  CHECK(r.f1 == doctest::Approx(200.0 / 3.0));
  CHECK(r.accuracy == doctest::Approx(75.0));
  CHECK(r.confusion.tp == 1);
  CHECK(r.confusion.fn == 1);
  CHECK(r.confusion.tn == 2);

  const auto perfect = confusion_and_rates({1, 0, 1, 0}, {1, 0, 1, 0});
  CHECK(perfect.accuracy == 100.0);
  CHECK(perfect.f1 == 100.0);
  CHECK(perfect.confusion.fp + perfect.confusion.fn == 0);

  const auto neg = confusion_and_rates({1, 1, 0, 0}, {0, 0, 0, 0});
  CHECK(neg.accuracy == 50.0);
  CHECK(neg.precision == 0.0);
  CHECK(neg.precision_degenerate);
  CHECK(neg.recall == 0.0);
  CHECK_THROWS_AS(confusion_and_rates({}, {}), ValidationError);
}

TEST_CASE("metric rows are internally consistent") {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const auto y = oracle::random_labels(30, 100 + static_cast<std::uint64_t>(t));
    Labels pred(30);
    for (auto& v : pred) v = static_cast<int>(rng.below(2));
    const auto r = confusion_and_rates(y, pred);
    CHECK(r.confusion.total() == 30);
    CHECK(r.accuracy == 100.0 * static_cast<double>(r.confusion.tp + r.confusion.tn) / 30.0);
    if (r.precision + r.recall > 0) CHECK(std::abs(r.f1 - 2 * r.precision * r.recall / (r.precision + r.recall)) < 1e-9);
  }
}

TEST_CASE("auc conventions and pair-count oracle") {
  CHECK(roc_auc({0, 0, 1, 1}, std::vector<double>{0.1, 0.2, 0.8, 0.9}) == 100.0);
  CHECK(roc_auc({0, 1, 0, 1}, std::vector<double>(4, 0.3)) == 50.0);
  CHECK_THROWS_AS(roc_auc({1, 1}, std::vector<double>{0.1, 0.2}), ValidationError);
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.below(199);
    const auto y = oracle::random_labels(n, 500 + static_cast<std::uint64_t>(t));
    std::vector<double> s(n);
    for (auto& v : s) v = static_cast<double>(rng.below(10)) / 10.0;  // many ties
    CHECK(std::abs(roc_auc(y, s) - oracle::pair_count_auc(y, s)) < 1e-12 * 100.0);
  }
}

TEST_CASE("mcnemar") {
  Labels y(10, 1), a(10, 1), b(10, 1);
  for (int i = 0; i < 6; ++i) b[static_cast<std::size_t>(i)] = 0;
  const auto r = mcnemar(a, b, y);
  CHECK(r.b == 6);
  CHECK(r.c == 0);
  CHECK(r.method == "exact");
  CHECK(r.p_value == doctest::Approx(0.03125).epsilon(1e-12));

  const auto same = mcnemar(a, a, y);
  CHECK(same.p_value == 1.0);
  CHECK(same.zero_discordance);

  CHECK(binomial_two_sided(3, 3) == 1.0);
  const auto sym = mcnemar(Labels{1, 0, 1, 0}, Labels{0, 1, 0, 1}, Labels{1, 1, 1, 1});
  CHECK(sym.b == sym.c);
  CHECK(sym.statistic == 0.0);
  CHECK(sym.p_value == 1.0);

  Labels big_y(60, 1), big_a(60, 1), big_b(60, 1);
  for (int i = 0; i < 20; ++i) big_b[static_cast<std::size_t>(i)] = 0;
  for (int i = 20; i < 30; ++i) big_a[static_cast<std::size_t>(i)] = 0;
  const auto chi = mcnemar(big_a, big_b, big_y);
  CHECK(chi.method == "chi2");
  CHECK(chi.statistic == doctest::Approx(81.0 / 30.0));
  CHECK(chi.p_value == doctest::Approx(std::erfc(std::sqrt(chi.statistic / 2.0))));
}

TEST_CASE("benjamini hochberg") {
  const auto adj = benjamini_hochberg({0.01, 0.02, 0.03, 0.04});
  for (double v : adj) CHECK(v == doctest::Approx(0.04));
  CHECK(benjamini_hochberg({0.3}) == std::vector<double>{0.3});
  CHECK(benjamini_hochberg({1.0, 1.0, 1.0}) == std::vector<double>{1.0, 1.0, 1.0});
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> p(1 + rng.below(20));
    for (auto& v : p) v = rng.uniform();
    const auto a = benjamini_hochberg(p);
    std::vector<std::size_t> order(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto x, auto z) { return p[x] < p[z]; });
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(a[i] >= p[i]);
      CHECK(a[i] <= 1.0);
      if (i > 0) CHECK(a[order[i]] >= a[order[i - 1]]);
    }
  }
}

TEST_CASE("bootstrap matches an independent resampling loop") {
  Rng rng(6);
  const auto y = oracle::random_labels(40, 77);
  std::vector<double> a(40), b(40);
  for (std::size_t i = 0; i < 40; ++i) {
    a[i] = y[i] + 0.8 * rng.normal();
    b[i] = y[i] + 1.5 * rng.normal();
  }
  const auto r = bootstrap_auc_diff(a, b, y, 300, 99);
  const auto ref = oracle::reference_bootstrap(a, b, y, 300, 99, 0.95);
  REQUIRE(r.ci.has_value());
  CHECK(std::abs(r.ci->first - ref.lo) < 1e-9);
  CHECK(std::abs(r.ci->second - ref.hi) < 1e-9);
  CHECK(r.p_value == doctest::Approx(ref.p));
  CHECK(r.redraws == ref.redraws);
  CHECK(r.ci->first <= r.estimate);
  CHECK(r.estimate <= r.ci->second);

  const auto self = bootstrap_auc_diff(a, a, y, 200, 1);
  CHECK(self.estimate == 0.0);
  CHECK(self.ci->first <= 0.0);
  CHECK(self.ci->second >= 0.0);
  CHECK_THROWS_AS(bootstrap_auc_diff(a, b, y, 50, 1), ValidationError);
}

TEST_CASE("bootstrap redraws single-class resamples") {
  Labels y(12, 0);
  y[0] = 1;
  std::vector<double> a(12), b(12);
  for (std::size_t i = 0; i < 12; ++i) {
    a[i] = static_cast<double>(i);
    b[i] = -static_cast<double>(i);
  }
  const auto r = bootstrap_auc_diff(a, b, y, 200, 5);
  const auto ref = oracle::reference_bootstrap(a, b, y, 200, 5, 0.95);
  CHECK(r.redraws > 0);
  CHECK(r.redraws == ref.redraws);
}

TEST_CASE("rank values under each tie rule") {
  const std::vector<double> v{3.0, 1.0, 1.0, 2.0, 1.0};
  CHECK(rank_values(v, TieRule::kMin) == std::vector<double>{5, 1, 1, 4, 1});
  CHECK(rank_values(v, TieRule::kAverage) == std::vector<double>{5, 2, 2, 4, 2});
  const std::vector<double> pair{1.0, 1.0, 2.0};
  CHECK(rank_values(pair, TieRule::kMidrankFloor) == std::vector<double>{1, 1, 3});
  CHECK(rank_values(pair, TieRule::kAverage) == std::vector<double>{1.5, 1.5, 3});
}

TEST_CASE("rank summary") {
  std::vector<MetricRow> rows(3);
  rows[0] = MetricRow{"A", 40, 99, 99, 99, 99, 99, 0.1};
  rows[1] = MetricRow{"B", 40, 90, 90, 90, 90, 90, 0.5};
  rows[2] = MetricRow{"C", 40, 80, 95, 80, 80, 80, 0.2};
  const auto r = rank_summary(rows);
  CHECK(r[0].avg_rank == 1.0);
  CHECK(r[1].ranks[1] == 3.0);
  CHECK(r[1].ranks[5] == 3.0);
  CHECK(r[2].ranks[5] == 2.0);
  rows[2].model = "A";
  CHECK_THROWS_AS(rank_summary(rows), ValidationError);
  const auto back = ranks_from_csv(ranks_to_csv(r));
  CHECK(back.size() == 3);
  CHECK(back[2].avg_rank == r[2].avg_rank);
}

TEST_CASE("metric csv round trip") {
  std::vector<MetricRow> rows{MetricRow{"KNN", 40, 97.5, 96.0, 99.0, 97.47, 98.1, 0.87}};
  const auto csv = metrics_to_csv(rows);
  CHECK(csv.rfind("model,mfcc,accuracy,precision,recall,f1,auc_roc,it_ms", 0) == 0);
  const auto back = metrics_from_csv(csv);
  CHECK(back[0].model == "KNN");
  CHECK(back[0].f1 == 97.47);
  CHECK_THROWS_AS(metrics_from_csv("model,acc\nx,1\n"), DataError);
}

TEST_CASE("calibration report") {
  CHECK(calibration_report(std::vector<double>{0.0, 1.0, 1.0, 0.0}, {0, 1, 1, 0}).brier == 0.0);
  CHECK(calibration_report(std::vector<double>{0.5, 0.5, 0.5, 0.5}, {0, 1, 1, 0}).brier == doctest::Approx(0.25));
  Rng rng(12);
  std::vector<double> p(100);
  Labels y(100);
  for (std::size_t i = 0; i < 100; ++i) {
    p[i] = rng.uniform();
    y[i] = rng.uniform() < p[i];
  }
  const auto rep = calibration_report(p, y, 10);
  double brier = 0.0;
  for (std::size_t i = 0; i < 100; ++i) brier += (p[i] - y[i]) * (p[i] - y[i]);
  CHECK(std::abs(rep.brier - brier / 100.0) < 1e-12);
  REQUIRE(rep.bins.size() == 10);
  long total = 0;
  for (std::size_t b = 0; b < 10; ++b) {
    double sp = 0.0, sy = 0.0;
    long n = 0;
    for (std::size_t i = 0; i < 100; ++i) {
      const auto bin = std::min<std::size_t>(static_cast<std::size_t>(p[i] * 10.0), 9);
      if (bin != b) continue;
      sp += p[i];
      sy += y[i];
      ++n;
    }
    CHECK(rep.bins[b].count == n);
    total += rep.bins[b].count;
    if (n == 0) {
      CHECK_FALSE(rep.bins[b].empirical_rate.has_value());
    } else {
      CHECK(std::abs(*rep.bins[b].mean_predicted - sp / n) < 1e-12);
      CHECK(std::abs(*rep.bins[b].empirical_rate - sy / n) < 1e-12);
    }
  }
  CHECK(total == 100);
}

TEST_CASE("timing order statistics") {
  const Matrix X = Matrix::Zero(8, 3);
  const auto rep = measure_inference_time([](const Matrix&) {}, X, 1, 5);
  CHECK(rep.median_ms >= 0.0);
  CHECK(rep.min_ms <= rep.median_ms);
  CHECK(rep.median_ms <= rep.max_ms);
  CHECK(rep.cores >= 1);
  CHECK_THROWS_AS(measure_inference_time([](const Matrix&) {}, X, 1, 4), ValidationError);
  CHECK_THROWS_AS(measure_inference_time([](const Matrix&) {}, X, 0, 5), ValidationError);
}

}
