#pragma once

#include <complex>
#include <span>
#include <vector>

#include <json.hpp>

namespace lobster::dsp {

/// One second-order section, normalised so a0 == 1:
///   y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  std::complex<double> response(std::complex<double> z) const;
  /// True when both poles lie strictly inside the unit circle.
  bool stable() const;
};

enum class FilterKind { kHighpass, kBandpass };

struct FilterDesign {
  FilterKind kind = FilterKind::kBandpass;
  /// Highpass uses `low_hz` only.
  double low_hz = 50.0;
  double high_hz = 8000.0;
  int order = 4;
  int sample_rate = 22050;
};

/// Butterworth cascade of second-order sections.
struct BiquadCascade {
  std::vector<Biquad> stages;
  FilterDesign design;

  std::complex<double> response_at(double frequency_hz) const;
  double magnitude_db(double frequency_hz) const;
};

/// Bilinear-transform Butterworth design with prewarped corners. Order is the
/// total filter order: a highpass of order N and a bandpass of order N both
/// use N/2 sections. Throws ValidationError for corners outside (0, Nyquist),
/// an inverted band, or an order other than 2, 4, or 8.
BiquadCascade design_filter(const FilterDesign& design);

/// Causal transposed direct form II with zero initial state. Throws DataError
/// when `sample_rate` differs from the design rate.
std::vector<double> apply_filter(const BiquadCascade& filter, std::span<const double> input,
                                 int sample_rate);

/// High-pass DC removal followed by the band-pass, both applied causally.
struct PreprocessFilters {
  BiquadCascade highpass;
  BiquadCascade bandpass;

  std::vector<double> apply(std::span<const double> input, int sample_rate) const;
};

/// Defaults: 2nd-order high-pass at 35 Hz, 4th-order band-pass 50-8000 Hz.
struct PreprocessConfig {
  double highpass_hz = 35.0;
  int highpass_order = 2;
  double band_low_hz = 50.0;
  double band_high_hz = 8000.0;
  int band_order = 4;
};

/// Throws ValidationError when highpass_hz lies outside [20, 50].
PreprocessFilters make_preprocess_filters(const PreprocessConfig& config, int sample_rate);

nlohmann::json to_json(const FilterDesign& design);
nlohmann::json to_json(const PreprocessConfig& config);

}  // namespace lobster::dsp
