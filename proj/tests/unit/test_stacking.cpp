#include "../support/scenarios.hpp"
#include "doctest.h"
#include "lobster/common/error.hpp"

using namespace lobster;
using namespace lobster::eval;

TEST_SUITE("stacking") {

TEST_CASE("held-out rows never reach their fold's learner") {
  const auto data = toy::blobs(60, 3, 1.0, 5);
  CHECK(scenario::leakage_witness(data, 5, 42) == "");
}

TEST_CASE("every row is filled once by the fold that held it out") {
  const auto c = scenario::complementary(3, 120, 10);
  StackOptions opt;
  opt.keep_fold_models = true;
  const auto model = stack_fit({scenario::column_learner("l", 0, 2), scenario::column_learner("r", 2, 2)},
                               c.train.X, c.train.y, opt, 8);
  CHECK(scenario::oof_structure(model, c.train.X) == "");
  CHECK(model.oof.meta_features().cols() == 2);
}

TEST_CASE("single learner with identity meta reproduces the base") {
  const auto c = scenario::complementary(4, 150, 100);
  StackOptions opt;
  opt.meta = MetaKind::kIdentity;
  const auto model = stack_fit({scenario::column_learner("only", 0, 4)}, c.train.X, c.train.y, opt, 2);
  const Vector base = model.bases[0].predict_p1(c.test.X);
  const Vector stacked = model.predict_p1(c.test.X);
  CHECK((base - stacked).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("stacking complementary learners beats each base and the average") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto out = scenario::run_complementary(seed);
    CAPTURE(seed);
    CHECK(out.stacked >= out.best_base);
    CHECK(out.stacked >= out.average);
  }
}

TEST_CASE("fold failures carry the fold and learner id") {
  const auto data = toy::blobs(40, 2, 1.0, 6);
  BaseLearner bad{"broken", [](const Matrix&, const Labels&, std::uint64_t) -> FittedLearner {
                    throw ConvergenceError("diverged");
                  }};
  try {
    stack_fit({bad}, data.X, data.y, StackOptions{}, 1);
    FAIL("expected an error");
  } catch (const ConvergenceError& e) {
    CHECK(std::string(e.what()).find("broken") != std::string::npos);
    CHECK(std::string(e.what()).find("fold") != std::string::npos);
  }
}

TEST_CASE("ablation rows are named") {
  const auto c = scenario::complementary(9, 100, 50);
  const auto model = stack_fit({scenario::column_learner("l", 0, 2), scenario::column_learner("r", 2, 2)},
                               c.train.X, c.train.y, StackOptions{}, 1);
  const auto rows = stacking_ablation(model, c.test.X, c.test.y, 40);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].model == "average");
  CHECK(rows[1].model == "majority_vote");
  CHECK(rows[2].model == "stacked");
}

}
