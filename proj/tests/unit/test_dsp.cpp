#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lobster/common/error.hpp"
#include "lobster/common/rng.hpp"
#include "lobster/dsp/filter.hpp"
#include "lobster/dsp/scaler.hpp"
#include "lobster/dsp/snr.hpp"

using namespace lobster;
using namespace lobster::dsp;

namespace {

BiquadCascade bandpass() {
  return design_filter(FilterDesign{FilterKind::kBandpass, 50.0, 8000.0, 4, 22050});
}

double rms(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

std::vector<double> noise(std::size_t n, double sd, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = sd * rng.normal();
  return x;
}

}  // namespace

TEST_SUITE("dsp") {

TEST_CASE("bandpass corners near -3 dB and flat mid-band") {
  const auto f = bandpass();
  for (double corner : {50.0, 8000.0}) {
    const double db = f.magnitude_db(corner);
    CHECK(db >= -3.5);
    CHECK(db <= -2.5);
  }
  CHECK(f.magnitude_db(std::sqrt(50.0 * 8000.0)) >= -0.1);
  for (const auto& s : f.stages) CHECK(s.stable());
}

TEST_CASE("highpass rejects DC") {
  const auto hp = design_filter(FilterDesign{FilterKind::kHighpass, 35.0, 0.0, 2, 22050});
  CHECK(std::abs(hp.response_at(0.0)) < 1e-12);
}

TEST_CASE("invalid designs are rejected") {
  CHECK_THROWS_AS(design_filter(FilterDesign{FilterKind::kBandpass, 8000.0, 50.0, 4, 22050}), ValidationError);
  CHECK_THROWS_AS(design_filter(FilterDesign{FilterKind::kBandpass, 50.0, 12000.0, 4, 22050}), ValidationError);
  CHECK_THROWS_AS(design_filter(FilterDesign{FilterKind::kBandpass, 50.0, 8000.0, 3, 22050}), ValidationError);
  CHECK_THROWS_AS(make_preprocess_filters(PreprocessConfig{60.0}, 22050), ValidationError);
}

TEST_CASE("impulse response energy decays") {
  const auto f = bandpass();
  std::vector<double> impulse(11 * 22050, 0.0);
  impulse[0] = 1.0;
  const auto h = apply_filter(f, impulse, 22050);
  double total = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    total += h[i] * h[i];
    if (i >= 10 * 22050) tail += h[i] * h[i];
  }
  CHECK(tail < 1e-9 * total);
}

TEST_CASE("filtering is linear and zero in, zero out") {
  const auto f = bandpass();
  const auto x = noise(4096, 0.3, 1), y = noise(4096, 0.2, 2);
  std::vector<double> combo(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) combo[i] = 2.0 * x[i] - 0.5 * y[i];
  const auto fx = apply_filter(f, x, 22050), fy = apply_filter(f, y, 22050), fc = apply_filter(f, combo, 22050);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(fc[i] - (2.0 * fx[i] - 0.5 * fy[i])));
  CHECK(worst < 1e-9);
  for (double v : apply_filter(f, std::vector<double>(512, 0.0), 22050)) REQUIRE(v == 0.0);
  CHECK_THROWS_AS(apply_filter(f, x, 44100), DataError);
}

TEST_CASE("10 Hz sine is suppressed after settling") {
  std::vector<double> x(22050);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2.0 * std::numbers::pi * 10.0 * static_cast<double>(i) / 22050.0);
  const auto y = make_preprocess_filters(PreprocessConfig{}, 22050).apply(x, 22050);
  const std::size_t settle = 22050 / 5;
  CHECK(rms(std::span(y).subspan(settle)) < 0.05 * rms(std::span(x).subspan(settle)));
}

TEST_CASE("snr screen keeps the loud minority") {
  std::vector<std::vector<double>> segs;
  for (int i = 0; i < 100; ++i) segs.push_back(std::vector<double>(1000, 0.01));  // -40 dB
  for (int i = 0; i < 10; ++i) segs.push_back(std::vector<double>(1000, 0.1));    // -20 dB
  const auto r = snr_screen(segs, SnrPolicy{});
  REQUIRE(r.kept.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(r.kept[i] == 100 + i);
  CHECK(r.floor_db == doctest::Approx(-40.0));

  std::vector<std::vector<double>> kept;
  for (auto i : r.kept) kept.push_back(segs[i]);
  CHECK(snr_screen_with_floor(kept, r.floor_db, 6.0).kept.size() == kept.size());
}

TEST_CASE("snr screen on constant levels follows the margin") {
  std::vector<std::vector<double>> segs(20, std::vector<double>(100, 0.05));
  CHECK(snr_screen(segs, SnrPolicy{}).kept.empty());
  CHECK(snr_screen(segs, SnrPolicy{0.0, 10.0}).kept.size() == 20);
  CHECK_THROWS_AS(snr_screen({}, SnrPolicy{}), ValidationError);
}

TEST_CASE("zscore hand case and degenerate column") {
  Matrix X(3, 2);
  X << 1, 5, 2, 5, 3, 5;
  const auto s = zscore_fit(X);
  const Matrix Z = zscore_apply(s, X);
  CHECK(Z(0, 0) == doctest::Approx(-1.2247).epsilon(1e-4));
  CHECK(Z(1, 0) == doctest::Approx(0.0));
  CHECK(Z(2, 0) == doctest::Approx(1.2247).epsilon(1e-4));
  for (int i = 0; i < 3; ++i) CHECK(Z(i, 1) == 0.0);
  CHECK(s.std(0) == doctest::Approx(std::sqrt(2.0 / 3.0)));
}

TEST_CASE("zscore standardises and inverts") {
  Rng rng(5);
  Matrix X(50, 4);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = 3.0 * j + (j + 1) * rng.normal();
  const auto s = zscore_fit(X);
  const Matrix Z = zscore_apply(s, X);
  for (Eigen::Index j = 0; j < 4; ++j) {
    CHECK(std::abs(Z.col(j).mean()) < 1e-9);
    const double sd = std::sqrt((Z.col(j).array() - Z.col(j).mean()).square().mean());
    CHECK(std::abs(sd - 1.0) < 1e-9);
  }
  CHECK((zscore_inverse(s, Z) - X).cwiseAbs().maxCoeff() < 1e-9);
  const auto back = scaler_from_json(to_json(s));
  CHECK((back.mean - s.mean).norm() == 0.0);
  CHECK_THROWS_AS(zscore_apply(s, Matrix::Zero(2, 3)), ValidationError);
}

}
