#include <cmath>

#include "../support/datasets.hpp"
#include "../support/oracles.hpp"
#include "doctest.h"
#include "lobster/common/error.hpp"
#include "lobster/common/rng.hpp"
#include "lobster/neural/cnn.hpp"
#include "lobster/neural/layers.hpp"
#include "lobster/neural/optimizer.hpp"

using namespace lobster;
using namespace lobster::neural;

namespace {

Tensor1D tensor(const std::vector<double>& v) {
  Tensor1D t(static_cast<int>(v.size()), 1);
  t.data = v;
  return t;
}

CnnSpec spec_with(const std::vector<int>& dilations, int filters, int dense) {
  CnnSpec s;
  s.layers.clear();
  for (int d : dilations) s.layers.push_back(ConvBlock{filters, 3, d, 0});
  s.dense_units = dense;
  return s;
}

}  // namespace

TEST_SUITE("neural") {

TEST_CASE("conv1d hand cases") {
  ConvShape identity{1, 1, 3, 1};
  const double w_id[3] = {0, 1, 0}, zero = 0.0;
  const auto out = conv1d_forward(tensor({4, 5, 6, 7}), identity, w_id, &zero);
  REQUIRE(out.length == 2);
  CHECK(out.data == std::vector<double>{5, 6});

  ConvShape dil{1, 1, 3, 2};
  const double w[3] = {1, 0, -1};
  const auto d = conv1d_forward(tensor({1, 2, 3, 4, 5}), dil, w, &zero);
  REQUIRE(d.length == 1);
  CHECK(d.data[0] == -4.0);
  CHECK_THROWS_AS(conv1d_forward(tensor({1, 2, 3, 4}), dil, w, &zero), ValidationError);
}

TEST_CASE("conv1d matches the triple loop") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int cin = 1 + static_cast<int>(rng.below(3)), filters = 1 + static_cast<int>(rng.below(4));
    const int kernel = 1 + 2 * static_cast<int>(rng.below(3)), dilation = 1 + static_cast<int>(rng.below(4));
    const int length = (kernel - 1) * dilation + 1 + static_cast<int>(rng.below(10));
    Tensor1D in(length, cin);
    for (auto& v : in.data) v = rng.normal();
    ConvShape shape{cin, filters, kernel, dilation};
    std::vector<double> w(shape.weight_count()), b(static_cast<std::size_t>(filters));
    for (auto& v : w) v = rng.normal();
    for (auto& v : b) v = rng.normal();
    const auto ours = conv1d_forward(in, shape, w.data(), b.data());
    const auto ref = oracle::naive_conv1d(in.data, length, cin, w, b, filters, kernel, dilation);
    REQUIRE(ours.data.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(ours.data[i] - ref[i]) < 1e-10);
  }
}

TEST_CASE("maxpool") {
  const auto r = maxpool1d(tensor({3, 1, 4, 1, 5, 9}), 2);
  CHECK(r.output.data == std::vector<double>{3, 4, 9});
  CHECK(maxpool1d(tensor({3, 1, 4}), 1).output.data == std::vector<double>{3, 1, 4});
  CHECK(maxpool1d(tensor({2, 2, 2, 2, 2}), 2).output.data == std::vector<double>{2, 2});
}

TEST_CASE("zero network outputs one half") {
  const auto L = plan_cnn(resolve_auto_pool(spec_with({1}, 4, 8), 12), 12);
  const Vector out = cnn_forward(L, Vector::Zero(static_cast<Eigen::Index>(L.total)), Matrix::Zero(2, 12));
  CHECK(out(0) == 0.5);
  CHECK(out(1) == 0.5);
}

TEST_CASE("hand-set single layer network") {
  CnnSpec s;
  s.layers = {ConvBlock{1, 3, 1, 2}};
  s.dense_units = 1;
  const auto L = plan_cnn(s, 6);
  REQUIRE(L.flat == 2);
  Vector p = Vector::Zero(static_cast<Eigen::Index>(L.total));
  const auto& c = L.convs[0];
  p(static_cast<Eigen::Index>(c.weight_offset)) = -1.0;
  p(static_cast<Eigen::Index>(c.weight_offset + 2)) = 1.0;
  p(static_cast<Eigen::Index>(L.dense_w)) = 1.0;
  p(static_cast<Eigen::Index>(L.dense_w + 1)) = 1.0;
  p(static_cast<Eigen::Index>(L.out_w)) = 0.5;
  p(static_cast<Eigen::Index>(L.out_b)) = -1.0;
  Matrix x(1, 6);
  x << 1, 2, 3, 4, 5, 6;
  // conv: x[t+2]-x[t] = 2 at four positions; pool -> (2, 2); dense relu(4); 0.5*4-1 = 1.
  CHECK(cnn_forward(L, p, x)(0) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-15));
}

TEST_CASE("cnn gradients match finite differences") {
  Rng rng(17);
  const std::vector<std::vector<int>> stacks = {{1}, {1, 2}, {1, 2, 4}, {1, 2, 4, 8}, {3}, {8}, {2, 5}};
  for (const auto& dil : stacks) {
    CAPTURE(dil.size());
    const auto L = plan_cnn(resolve_auto_pool(spec_with(dil, 3, 5), 40), 40);
    // Zero-initialised biases put dead windows exactly on a ReLU kink.
    Vector params = cnn_init(L, 100 + dil.size());
    for (Eigen::Index i = 0; i < params.size(); ++i) params(i) += 0.05 * rng.normal();
    Matrix X(3, 40);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
    const Labels y{0, 1, 1};
    Vector grad;
    cnn_loss_and_gradient(L, params, X, y, &grad);
    auto loss = [&](const Vector& th) { return cnn_loss_and_gradient(L, th, X, y, nullptr); };
    const auto audit = oracle::piecewise_gradient_error(loss, params, grad, 1e-4, 1e-4);
    CAPTURE(audit.refined);
    CHECK(audit.worst < 1e-4);
    CHECK(audit.refined <= params.size() / 20);
  }
}

TEST_CASE("shape algebra agrees with computed tensors") {
  Rng rng(4);
  for (int length : {20, 31, 40, 60}) {
    for (int layers = 1; layers <= 4; ++layers) {
      for (auto sched : {DilationSchedule::kExponential, DilationSchedule::kLinear}) {
        auto spec = spec_with(dcnn_dilation_schedule(layers, sched), 2, 4);
        CnnLayout L;
        try {
          L = plan_cnn(resolve_auto_pool(spec, length), length);
        } catch (const ValidationError&) {
          CHECK(receptive_field(3, dcnn_dilation_schedule(layers, sched)) > length);
          continue;
        }
        Tensor1D t(length, 1);
        for (auto& v : t.data) v = rng.normal();
        for (const auto& plan : L.convs) {
          REQUIRE(t.length == plan.in_length);
          std::vector<double> w(plan.conv.weight_count(), 0.1), b(static_cast<std::size_t>(plan.conv.filters), 0.0);
          t = conv1d_forward(t, plan.conv, w.data(), b.data());
          CHECK(t.length == plan.conv_length);
          t = maxpool1d(t, plan.pool).output;
          CHECK(t.length == plan.out_length);
        }
        CHECK(t.length * t.channels == L.flat);
      }
    }
  }
  CHECK_THROWS_AS(plan_cnn(spec_with({1, 2, 4, 8}, 2, 4), 20), ValidationError);
}

TEST_CASE("dilation schedules and receptive field") {
  CHECK(dcnn_dilation_schedule(1) == std::vector<int>{1});
  CHECK(dcnn_dilation_schedule(3) == std::vector<int>{1, 2, 4});
  CHECK(dcnn_dilation_schedule(4, DilationSchedule::kLinear) == std::vector<int>{1, 2, 3, 4});
  CHECK(receptive_field(3, dcnn_dilation_schedule(4)) == 31);
}

TEST_CASE("adam single step by hand") {
  OptimizerConfig cfg;
  Optimizer opt(cfg, 1);
  Vector theta(1), g(1);
  theta << 2.0;
  g << 0.5;
  opt.step(theta, g);
  const double m_hat = (0.1 * 0.5) / (1.0 - 0.9);
  const double v_hat = (0.001 * 0.25) / (1.0 - 0.999);
  CHECK(theta(0) - 2.0 == doctest::Approx(-1e-3 * m_hat / (std::sqrt(v_hat) + 1e-8)).epsilon(1e-12));

  cfg.learning_rate = 0.0;
  for (auto kind : {OptimizerKind::kAdam, OptimizerKind::kRmsprop}) {
    cfg.kind = kind;
    Optimizer frozen(cfg, 3);
    Vector p(3), gr(3);
    p << 1, 2, 3;
    gr << 0.3, -4, 9;
    for (int i = 0; i < 10; ++i) frozen.step(p, gr);
    CHECK(p == Vector::LinSpaced(3, 1, 3));
  }
}

TEST_CASE("small-step full-batch loss is non-increasing") {
  const auto prob = toy::blobs(16, 12, 1.0, 19);
  auto spec = spec_with({1, 2}, 3, 6);
  const auto L = plan_cnn(resolve_auto_pool(spec, 12), 12);
  Vector p = cnn_init(L, 5);
  OptimizerConfig cfg;
  cfg.learning_rate = 1e-4;
  Optimizer opt(cfg, p.size());
  Vector g;
  double prev = cnn_loss_and_gradient(L, p, prob.X, prob.y, &g);
  for (int step = 0; step < 20; ++step) {
    opt.step(p, g);
    const double now = cnn_loss_and_gradient(L, p, prob.X, prob.y, &g);
    CHECK(now <= prev + 1e-12);
    prev = now;
  }
}

TEST_CASE("training separates synthetic vectors and is deterministic") {
  const auto prob = toy::blobs(400, 40, 1.5, 23);
  auto spec = spec_with({1}, 16, 32);
  spec.layers[0].pool = 2;
  const auto a = train_cnn(spec, prob.X, prob.y, 8);
  double best = 0.0;
  for (const auto& e : a.curve) best = std::max(best, e.val_accuracy);
  CHECK(a.curve.size() <= 10);
  CHECK(best >= 0.95);
  const auto b = train_cnn(spec, prob.X, prob.y, 8);
  CHECK((a.params - b.params).norm() == 0.0);
  CHECK(cnn_spec_from_json(to_json(spec)).layers.size() == 1);
  CHECK(display_name(spec) == "1D-CNN (1 L)");
}

}
