#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "lobster/common/error.hpp"
#include "lobster/ingest/dataset.hpp"
#include "lobster/ingest/synthetic.hpp"
#include "lobster/ingest/wav.hpp"

using namespace lobster;
using namespace lobster::ingest;

namespace {

std::vector<std::uint8_t> pcm16_bytes(const std::vector<std::int16_t>& samples, int channels, int rate) {
  std::vector<std::uint8_t> b;
  auto put = [&](std::uint32_t v, int n) {
    for (int i = 0; i < n; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  auto tag = [&](const char* s) { b.insert(b.end(), s, s + 4); };
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  tag("RIFF");
  put(36 + data_bytes, 4);
  tag("WAVE");
  tag("fmt ");
  put(16, 4);
  put(1, 2);
  put(static_cast<std::uint32_t>(channels), 2);
  put(static_cast<std::uint32_t>(rate), 4);
  put(static_cast<std::uint32_t>(rate * channels * 2), 4);
  put(static_cast<std::uint32_t>(channels * 2), 2);
  put(16, 2);
  tag("data");
  put(data_bytes, 4);
  for (auto s : samples) put(static_cast<std::uint16_t>(s), 2);
  return b;
}

double centroid(const std::vector<double>& x, int rate) {
  // Power summed over 256-sample frames, each by direct DFT.
  constexpr std::size_t n = 256;
  static const auto table = [] {
    std::vector<std::complex<double>> t(n * n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) t[k * n + j] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * j % n) / n);
    }
    return t;
  }();
  double num = 0.0, den = 0.0;
  for (std::size_t off = 0; off + n <= x.size(); off += n) {
    for (std::size_t k = 1; k < n / 2; ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += x[off + j] * table[k * n + j];
      const double p = std::norm(acc);
      num += p * static_cast<double>(k) * rate / n;
      den += p;
    }
  }
  return num / den;
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("pcm16 decode scales by 1/32768") {
  const auto clip = decode_wav(pcm16_bytes({0, 32767}, 1, 22050));
  CHECK(clip.sample_rate == 22050);
  REQUIRE(clip.samples.size() == 2);
  CHECK(clip.samples[0] == 0.0);
  CHECK(clip.samples[1] == doctest::Approx(32767.0 / 32768.0).epsilon(1e-12));
}

TEST_CASE("stereo channels average to mono") {
  const auto bytes = encode_wav_channels({{1.0}, {-1.0}}, 22050, WavSampleFormat::kFloat32);
  const auto clip = decode_wav(bytes);
  REQUIRE(clip.samples.size() == 1);
  CHECK(clip.samples[0] == 0.0);
}

TEST_CASE("sine round trip through pcm16 stays below 2^-14") {
  AudioClip clip{{}, 22050};
  for (int i = 0; i < 22050; ++i) clip.samples.push_back(0.8 * std::sin(2.0 * std::numbers::pi * 150.0 * i / 22050.0));
  const auto back = decode_wav(encode_wav(clip));
  REQUIRE(back.samples.size() == clip.samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < clip.samples.size(); ++i) worst = std::max(worst, std::abs(back.samples[i] - clip.samples[i]));
  CHECK(worst < std::ldexp(1.0, -14));
}

TEST_CASE("malformed wav inputs are typed errors") {
  std::vector<std::uint8_t> junk{'R', 'I', 'F', 'F'};
  CHECK_THROWS_AS(decode_wav(junk), WavError);
  auto empty = pcm16_bytes({}, 1, 22050);
  try {
    decode_wav(empty);
    FAIL("expected an error");
  } catch (const WavError& e) {
    CHECK(e.wav_kind() == WavErrorKind::kEmptyData);
  }
}

TEST_CASE("segment_clip floors to whole seconds") {
  IndividualLabels who{"L1", Sex::kFemale, Age::kAdult};
  AudioClip clip{std::vector<double>(33075, 0.1), 22050};
  const auto segs = segment_clip(clip, who);
  CHECK(segs.size() == 1);
  CHECK(segs[0].samples.size() == 22050);

  std::size_t total = 0;
  for (int c = 0; c < 3; ++c) {
    const auto two = segment_clip(AudioClip{std::vector<double>(44100, 0.0), 22050}, who);
    REQUIRE(two.size() == 2);
    CHECK(two[0].source_offset == 0);
    CHECK(two[1].source_offset == 22050);
    total += two.size();
  }
  CHECK(total == 6);
  CHECK(segment_clip(AudioClip{std::vector<double>(100, 0.0), 22050}, who).empty());
  CHECK_THROWS_AS(segment_clip(AudioClip{std::vector<double>(44100, 0.0), 44100}, who), DataError);
}

TEST_CASE("manifest rejects duplicates and stratum conflicts") {
  const std::string ok = "path,individual_id,sex,age\na.wav,L1,male,adult\nb.wav,L1,Male,Adult\n";
  CHECK(parse_manifest_csv(ok).entries.size() == 2);
  CHECK_THROWS_AS(validate_manifest(parse_manifest_csv("path,individual_id,sex,age\na.wav,L1,male,adult\na.wav,L2,male,adult\n")),
                  ValidationError);
  CHECK_THROWS_AS(validate_manifest(parse_manifest_csv("path,individual_id,sex,age\na.wav,L1,male,adult\nb.wav,L1,female,adult\n")),
                  ValidationError);
}

TEST_CASE("synthetic generation is deterministic") {
  auto spec = default_synthetic_spec();
  spec.n_per_class = 4;
  const auto a = generate_synthetic_dataset(spec);
  const auto b = generate_synthetic_dataset(spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].samples == b[i].samples);
}

TEST_CASE("silent profiles give all-zero segments") {
  auto spec = default_synthetic_spec();
  spec.n_per_class = 2;
  for (auto& p : spec.profiles) {
    p.noise_floor = 0.0;
    p.burst_rate = 0.0;
  }
  for (const auto& s : generate_synthetic_dataset(spec)) {
    for (double v : s.samples) REQUIRE(v == 0.0);
  }
}

TEST_CASE("buzz centroid sits below click centroid") {
  SyntheticSpec spec;
  spec.profiles = {buzz_profile("buzz", Sex::kMale, Age::kAdult), click_profile("click", Sex::kMale, Age::kJuvenile)};
  for (auto& p : spec.profiles) p.silence_fraction = 0.0;
  spec.n_per_class = 200;
  spec.seed = 7;
  const auto segs = generate_synthetic_dataset(spec);
  int wins = 0;
  for (std::size_t i = 0; i < 200; ++i) wins += centroid(segs[i].samples, spec.sample_rate) < centroid(segs[200 + i].samples, spec.sample_rate);
  CHECK(wins == 200);
}

TEST_CASE("synthetic spec json rejects unknown keys") {
  auto j = to_json(default_synthetic_spec());
  CHECK(synthetic_spec_from_json(j).profiles.size() == default_synthetic_spec().profiles.size());
  j["bogus"] = 1;
  CHECK_THROWS_AS(synthetic_spec_from_json(j), ValidationError);
}

}
