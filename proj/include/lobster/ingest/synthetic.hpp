#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lobster/ingest/dataset.hpp"

namespace lobster::ingest {

/// Generator settings for one labelled class of synthetic emissions.
///
/// Each segment is Gaussian background noise plus a number of bursts. A burst
/// is a Hann-enveloped sum of `n_tones` random-phase sinusoids drawn inside
/// [center - bandwidth/2, center + bandwidth/2]. Long narrow-band bursts give
/// the carapace "buzz"; millisecond broadband bursts give "clicks".
struct ClassProfile {
  std::string name;
  Sex sex = Sex::kMale;
  Age age = Age::kAdult;
  double center_hz = 150.0;
  double bandwidth_hz = 40.0;
  /// Mean bursts per second (Poisson). Zero disables bursts.
  double burst_rate = 3.0;
  /// Standard deviation of the background noise.
  double noise_floor = 0.005;
  double burst_amplitude = 0.3;
  double burst_duration_s = 0.25;
  /// Probability that a segment carries background noise only.
  double silence_fraction = 0.0;
  int n_tones = 8;
};

struct SyntheticSpec {
  std::vector<ClassProfile> profiles;
  std::size_t n_per_class = 120;
  std::uint64_t seed = 42;
  int sample_rate = kDefaultSampleRate;
  /// Individuals per profile; segments are dealt to them round-robin.
  int individuals_per_profile = 6;
  /// Per-individual relative spread of the centre frequency.
  double individual_jitter = 0.05;
  /// Per-individual spread of the burst gain, in dB.
  double individual_gain_db = 3.0;
};

/// Buzz profiles for adults, click profiles for juveniles; sex shifts the
/// centre frequency. Six individuals per stratum.
SyntheticSpec default_synthetic_spec();
ClassProfile buzz_profile(std::string name, Sex sex, Age age, double center_hz = 150.0);
ClassProfile click_profile(std::string name, Sex sex, Age age, double center_hz = 3000.0);

/// Throws ValidationError for fewer than two profiles, n_per_class == 0, or a
/// profile with non-positive bandwidth.
void validate(const SyntheticSpec& spec);

/// Deterministic for a fixed spec (including seed). Segments are ordered by
/// profile, then by draw index.
std::vector<AudioSegment> generate_synthetic_dataset(const SyntheticSpec& spec);

/// JSON schema: {"seed", "n_per_class", "sample_rate", "individuals_per_profile",
/// "individual_jitter", "individual_gain_db", "profiles": [{"name", "sex", "age",
/// "center_hz", "bandwidth_hz", "burst_rate", "noise_floor", "burst_amplitude",
/// "burst_duration_s", "silence_fraction", "n_tones"}]}. Omitted keys take the
/// defaults; unknown keys are rejected.
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& node);
nlohmann::json to_json(const SyntheticSpec& spec);

}  // namespace lobster::ingest
