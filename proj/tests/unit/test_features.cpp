#include <cmath>
#include <numbers>

#include "../support/oracles.hpp"
#include "doctest.h"
#include "lobster/common/error.hpp"
#include "lobster/common/rng.hpp"
#include "lobster/features/feature_matrix.hpp"
#include "lobster/features/mfcc.hpp"
#include "lobster/features/pca.hpp"

using namespace lobster;
using namespace lobster::features;

namespace {

std::vector<double> random_segment(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  const double f = rng.uniform(80.0, 4000.0);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 0.2 * rng.normal() + 0.5 * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / 22050.0);
  }
  return x;
}

Matrix random_matrix(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix X(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = (1.0 + 0.5 * j) * rng.normal() + 0.3 * (j > 0 ? X(i, j - 1) : 0.0);
  return X;
}

Matrix covariance(const Matrix& X) {
  const Matrix C = X.rowwise() - X.colwise().mean();
  return C.transpose() * C / static_cast<double>(X.rows() - 1);
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("stft of silence is zero") {
  MfccConfig cfg;
  const Matrix P = stft_power(std::vector<double>(22050, 0.0), cfg);
  CHECK(P.rows() == 1 + (22050 - 2048) / 512);
  CHECK(P.cols() == 1025);
  CHECK(P.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(stft_power(std::vector<double>(100, 0.0), cfg), ValidationError);
}

TEST_CASE("bin-centred sine keeps its energy within one bin") {
  MfccConfig cfg;
  const int k0 = 40;
  std::vector<double> x(4096);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2.0 * std::numbers::pi * k0 * static_cast<double>(i) / cfg.n_fft);
  const Matrix P = stft_power(x, cfg);
  for (Eigen::Index t = 0; t < P.rows(); ++t) {
    const double near = P(t, k0 - 1) + P(t, k0) + P(t, k0 + 1);
    CHECK(near >= 0.99 * P.row(t).sum());
  }
}

TEST_CASE("stft satisfies Parseval") {
  MfccConfig cfg;
  const auto x = random_segment(22050, 3);
  const Matrix P = stft_power(x, cfg);
  const auto w = hann_window(cfg.n_fft);
  const int N = cfg.n_fft;
  for (Eigen::Index t = 0; t < P.rows(); ++t) {
    double energy = 0.0;
    for (int n = 0; n < N; ++n) {
      const double v = x[static_cast<std::size_t>(t * cfg.hop + n)] * w[static_cast<std::size_t>(n)];
      energy += v * v;
    }
    const double spectral = (P(t, 0) + P(t, N / 2) + 2.0 * P.row(t).segment(1, N / 2 - 1).sum()) / N;
    CHECK(std::abs(spectral - energy) <= 1e-6 * energy);
  }
}

TEST_CASE("mel filterbank construction") {
  const Matrix fb = mel_filterbank(128, 50.0, 8000.0, 2048, 22050);
  Eigen::Index prev = -1;
  for (Eigen::Index m = 0; m < fb.rows(); ++m) {
    CHECK(fb.row(m).sum() > 0.0);
    CHECK(fb.row(m).minCoeff() >= 0.0);
    Eigen::Index peak;
    fb.row(m).maxCoeff(&peak);
    CHECK(peak >= prev);
    prev = peak;
  }
  const Matrix one = mel_filterbank(1, 0.0, 11025.0, 2048, 22050);
  CHECK(one(0, 0) == 0.0);
  CHECK(one(0, 1024) == 0.0);
  CHECK((one.row(0).array() > 0.0).count() == 1023);
  CHECK_THROWS_AS(mel_filterbank(512, 50.0, 8000.0, 256, 22050), ValidationError);
}

TEST_CASE("mel corner frequencies are uniformly spaced in mel") {
  const double lo = hz_to_mel(50.0), hi = hz_to_mel(8000.0);
  CHECK(hz_to_mel(1000.0) == doctest::Approx(2595.0 * std::log10(1.0 + 1000.0 / 700.0)).epsilon(1e-14));
  double prev_hz = 0.0;
  for (int i = 0; i <= 129; ++i) {
    const double mel = lo + (hi - lo) * i / 129.0;
    const double hz = mel_to_hz(mel);
    CHECK(hz > prev_hz);
    prev_hz = hz;
    CHECK(std::abs(hz_to_mel(hz) - mel) < 1e-6);
  }
}

TEST_CASE("mfcc of silence is the DCT of a constant") {
  MfccConfig cfg;
  const auto seq = mfcc(std::vector<double>(22050, 0.0), cfg);
  const double c0 = std::sqrt(static_cast<double>(cfg.n_mels)) * std::log(cfg.log_floor);
  for (Eigen::Index t = 0; t < seq.frames.rows(); ++t) {
    CHECK(seq.frames(t, 0) == doctest::Approx(c0).epsilon(1e-12));
    CHECK(seq.frames.row(t).tail(cfg.n_mfcc - 1).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("mfcc chain matches the brute-force reference") {
  for (int n_mfcc : {40, 50, 60}) {
    MfccConfig cfg;
    cfg.n_mfcc = n_mfcc;
    const auto x = random_segment(22050, 100 + static_cast<std::uint64_t>(n_mfcc));
    const Matrix ours = mfcc(x, cfg).frames;
    const Matrix ref = oracle::naive_mfcc(x, cfg);
    REQUIRE(ours.rows() == ref.rows());
    CHECK((ours - ref).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("noise and buzz are far apart in MFCC space") {
  MfccExtractor ex{MfccConfig{}};
  std::vector<Vector> noise, buzz;
  Rng rng(11);
  for (int d = 0; d < 50; ++d) {
    std::vector<double> a(22050), b(22050);
    const double gain = rng.uniform(0.08, 0.12);
    const double phase = rng.uniform(0.0, 6.28);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = gain * rng.normal();
      b[i] = 0.3 * std::sin(2.0 * std::numbers::pi * 150.0 * static_cast<double>(i) / 22050.0 + phase) + 0.005 * rng.normal();
    }
    noise.push_back(ex.pooled(a));
    buzz.push_back(ex.pooled(b));
  }
  auto mean_dist = [](const std::vector<Vector>& u, const std::vector<Vector>& v, bool same) {
    double s = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = same ? i + 1 : 0; j < v.size(); ++j) {
        s += (u[i] - v[j]).norm();
        ++n;
      }
    return s / n;
  };
  const double within = std::max(mean_dist(noise, noise, true), mean_dist(buzz, buzz, true));
  CHECK(mean_dist(noise, buzz, false) > 5.0 * within);
}

TEST_CASE("mean_pool") {
  MfccSequence s;
  s.frames.resize(3, 2);
  s.frames << 1, 2, 3, 4, 5, 6;
  const Vector m = mean_pool(s);
  CHECK(m(0) == doctest::Approx(3.0));
  CHECK(m(1) == doctest::Approx(4.0));

  MfccSequence perm = s;
  perm.frames << 5, 6, 1, 2, 3, 4;
  CHECK((mean_pool(perm) - m).norm() < 1e-15);

  MfccSequence sym;
  sym.frames.resize(2, 3);
  sym.frames << 1, -2, 3, -1, 2, -3;
  CHECK(mean_pool(sym).norm() == 0.0);

  MfccSequence single;
  single.frames = s.frames.topRows(1);
  CHECK((mean_pool(single) - s.frames.row(0).transpose()).norm() == 0.0);

  MfccSequence empty;
  empty.frames.resize(0, 4);
  CHECK_THROWS_AS(mean_pool(empty), ValidationError);
}

TEST_CASE("pca with k = d is a complete rotation") {
  const Matrix X = random_matrix(80, 6, 21);
  const auto model = pca_fit(X, 6);
  CHECK(model.tev == doctest::Approx(1.0).epsilon(1e-9));
  CHECK((model.components * model.components.transpose() - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((pca_inverse_transform(model, pca_transform(model, X)) - X).cwiseAbs().maxCoeff() < 1e-8);
  const Matrix mean_row = model.mean.transpose();
  CHECK(pca_transform(model, mean_row).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pca eigen-pairs, ordering, signs and decorrelation") {
  const Matrix X = random_matrix(120, 8, 22);
  const auto model = pca_fit(X, 5);
  const Matrix C = covariance(X);
  for (Eigen::Index i = 0; i < 5; ++i) {
    const Vector v = model.components.row(i).transpose();
    CHECK((C * v - model.explained_variance(i) * v).cwiseAbs().maxCoeff() < 1e-8);
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    CHECK(v(arg) > 0.0);
    if (i > 0) CHECK(model.explained_variance_ratio(i) <= model.explained_variance_ratio(i - 1));
  }
  CHECK(model.tev <= 1.0 + 1e-9);
  CHECK(model.tev > 0.0);
  const Matrix Cz = covariance(pca_transform(model, X));
  const double trace = Cz.trace();
  for (Eigen::Index i = 0; i < Cz.rows(); ++i)
    for (Eigen::Index j = 0; j < Cz.cols(); ++j)
      if (i != j) CHECK(std::abs(Cz(i, j)) < 1e-8 * trace);
}

TEST_CASE("pca recovers a line") {
  Rng rng(23);
  Matrix X(200, 2);
  for (Eigen::Index i = 0; i < 200; ++i) {
    const double t = rng.normal();
    X(i, 0) = t + 1e-4 * rng.normal();
    X(i, 1) = 2.0 * t + 1e-4 * rng.normal();
  }
  const auto model = pca_fit(X, 1);
  CHECK(std::abs(model.components(0, 0) - 1.0 / std::sqrt(5.0)) < 1e-3);
  CHECK(std::abs(model.components(0, 1) - 2.0 / std::sqrt(5.0)) < 1e-3);
  CHECK(model.explained_variance_ratio(0) > 0.999);
}

TEST_CASE("pca rank deficiency and preconditions") {
  Matrix X = random_matrix(30, 4, 24);
  X.col(3) = X.col(0) + X.col(1);
  const auto model = pca_fit(X, 4);
  CHECK(model.rank_deficient);
  CHECK(model.explained_variance_ratio(3) == 0.0);
  CHECK_THROWS_AS(pca_fit(X, 5), ValidationError);
  CHECK_THROWS_AS(pca_fit(X.topRows(3), 3), ValidationError);
  CHECK_THROWS_AS(pca_transform(model, Matrix::Zero(2, 3)), ValidationError);
  const auto back = pca_from_json(to_json(model, ArrayEncoding::kBase64));
  CHECK((back.components - model.components).norm() == 0.0);
}

TEST_CASE("feature files round trip") {
  FeatureMatrix fm;
  fm.rows = random_matrix(5, 3, 25);
  fm.labels = {0, 1, 1, 0, 1};
  fm.groups = {"a", "b", "b,c", "d", "e"};
  fm.feature_names = default_feature_names(3);
  const auto csv = parse_feature_csv(write_feature_csv(fm));
  CHECK((csv.rows - fm.rows).norm() == 0.0);
  CHECK(csv.groups == fm.groups);
  const auto bin = parse_feature_binary(write_feature_binary(fm));
  CHECK((bin.rows - fm.rows).norm() == 0.0);
  CHECK(bin.labels == fm.labels);
  CHECK(write_feature_csv(fm).rfind("f0,f1,f2,label,group", 0) == 0);
}

}
