#include "lobster/dsp/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lobster/common/error.hpp"

namespace lobster::dsp {
namespace {

using cd = std::complex<double>;

cd bilinear(cd s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

double prewarp(double hz, double fs) { return 2.0 * fs * std::tan(std::numbers::pi * hz / fs); }

std::vector<cd> butterworth_prototype(int n) {
  std::vector<cd> poles;
  for (int k = 0; k < n; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + n + 1) / (2.0 * n);
    poles.emplace_back(std::cos(theta), std::sin(theta));
  }
  return poles;
}

/// Groups digital poles into (a1, a2) pairs: conjugate pairs first, then
/// real poles two at a time.
std::vector<std::pair<double, double>> pair_poles(std::vector<cd> poles) {
  constexpr double kImagTol = 1e-9;
  std::vector<std::pair<double, double>> out;
  std::vector<double> reals;
  for (const auto& p : poles) {
    if (p.imag() > kImagTol) {
      out.emplace_back(-2.0 * p.real(), std::norm(p));
    } else if (std::abs(p.imag()) <= kImagTol) {
      reals.push_back(p.real());
    }
  }
  std::sort(reals.begin(), reals.end());
  if (reals.size() % 2 != 0) throw ValidationError("filter design produced an odd real pole");
  for (std::size_t i = 0; i < reals.size(); i += 2) {
    out.emplace_back(-(reals[i] + reals[i + 1]), reals[i] * reals[i + 1]);
  }
  return out;
}

void normalize_at(Biquad& s, double omega) {
  const double gain = std::abs(s.response(std::polar(1.0, omega)));
  s.b0 /= gain;
  s.b1 /= gain;
  s.b2 /= gain;
}

void check_corner(double hz, double nyquist, const char* name) {
  if (!(hz > 0.0) || hz >= nyquist) {
    throw ValidationError(std::string(name) + " corner " + std::to_string(hz) +
                          " Hz must lie in (0, " + std::to_string(nyquist) + ") Hz");
  }
}

}  // namespace

cd Biquad::response(cd z) const {
  const cd zi = 1.0 / z;
  return (b0 + b1 * zi + b2 * zi * zi) / (1.0 + a1 * zi + a2 * zi * zi);
}

bool Biquad::stable() const {
  // Jury conditions for z^2 + a1 z + a2.
  return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2;
}

cd BiquadCascade::response_at(double frequency_hz) const {
  const double omega = 2.0 * std::numbers::pi * frequency_hz / design.sample_rate;
  const cd z = std::polar(1.0, omega);
  cd h = 1.0;
  for (const auto& s : stages) h *= s.response(z);
  return h;
}

double BiquadCascade::magnitude_db(double frequency_hz) const {
  return 20.0 * std::log10(std::abs(response_at(frequency_hz)));
}

BiquadCascade design_filter(const FilterDesign& design) {
  if (design.sample_rate <= 0) throw ValidationError("sample rate must be positive");
  if (design.order != 2 && design.order != 4 && design.order != 8) {
    throw ValidationError("filter order must be 2, 4, or 8 (got " +
                          std::to_string(design.order) + ")");
  }
  const double fs = design.sample_rate;
  const double nyquist = 0.5 * fs;

  BiquadCascade cascade;
  cascade.design = design;

  if (design.kind == FilterKind::kHighpass) {
    check_corner(design.low_hz, nyquist, "high-pass");
    const double wc = prewarp(design.low_hz, fs);
    std::vector<cd> digital;
    for (const auto& p : butterworth_prototype(design.order)) digital.push_back(bilinear(wc / p, fs));
    for (const auto& [a1, a2] : pair_poles(digital)) {
      Biquad s{1.0, -2.0, 1.0, a1, a2};
      normalize_at(s, std::numbers::pi);
      cascade.stages.push_back(s);
    }
  } else {
    check_corner(design.low_hz, nyquist, "band-pass low");
    check_corner(design.high_hz, nyquist, "band-pass high");
    if (design.low_hz >= design.high_hz) {
      throw ValidationError("band-pass low corner must be below the high corner");
    }
    const double wl = prewarp(design.low_hz, fs);
    const double wh = prewarp(design.high_hz, fs);
    const double w0 = std::sqrt(wl * wh);
    const double bw = wh - wl;
    std::vector<cd> digital;
    for (const auto& p : butterworth_prototype(design.order / 2)) {
      const cd pb = p * bw;
      const cd root = std::sqrt(pb * pb - 4.0 * w0 * w0);
      digital.push_back(bilinear(0.5 * (pb + root), fs));
      digital.push_back(bilinear(0.5 * (pb - root), fs));
    }
    const double center = 2.0 * std::atan(w0 / (2.0 * fs));
    for (const auto& [a1, a2] : pair_poles(digital)) {
      Biquad s{1.0, 0.0, -1.0, a1, a2};
      normalize_at(s, center);
      cascade.stages.push_back(s);
    }
  }

  for (const auto& s : cascade.stages) {
    if (!s.stable()) throw ValidationError("designed filter section is unstable");
  }
  return cascade;
}

std::vector<double> apply_filter(const BiquadCascade& filter, std::span<const double> input,
                                 int sample_rate) {
  if (sample_rate != filter.design.sample_rate) {
    throw DataError("segment rate " + std::to_string(sample_rate) +
                    " Hz does not match filter rate " +
                    std::to_string(filter.design.sample_rate) + " Hz");
  }
  std::vector<double> signal(input.begin(), input.end());
  for (const auto& s : filter.stages) {
    double z1 = 0.0, z2 = 0.0;
    for (auto& x : signal) {
      const double y = s.b0 * x + z1;
      z1 = s.b1 * x - s.a1 * y + z2;
      z2 = s.b2 * x - s.a2 * y;
      x = y;
    }
  }
  return signal;
}

std::vector<double> PreprocessFilters::apply(std::span<const double> input,
                                             int sample_rate) const {
  const auto stage1 = apply_filter(highpass, input, sample_rate);
  return apply_filter(bandpass, stage1, sample_rate);
}

PreprocessFilters make_preprocess_filters(const PreprocessConfig& config, int sample_rate) {
  if (config.highpass_hz < 20.0 || config.highpass_hz > 50.0) {
    throw ValidationError("high-pass cutoff must lie in [20, 50] Hz");
  }
  PreprocessFilters f;
  f.highpass = design_filter(
      {FilterKind::kHighpass, config.highpass_hz, 0.0, config.highpass_order, sample_rate});
  f.bandpass = design_filter({FilterKind::kBandpass, config.band_low_hz, config.band_high_hz,
                              config.band_order, sample_rate});
  return f;
}

nlohmann::json to_json(const FilterDesign& design) {
  nlohmann::json j{{"kind", design.kind == FilterKind::kHighpass ? "highpass" : "bandpass"},
                   {"order", design.order},
                   {"sample_rate", design.sample_rate}};
  if (design.kind == FilterKind::kHighpass) {
    j["cutoff_hz"] = design.low_hz;
  } else {
    j["low_hz"] = design.low_hz;
    j["high_hz"] = design.high_hz;
  }
  return j;
}

nlohmann::json to_json(const PreprocessConfig& config) {
  return {{"highpass_hz", config.highpass_hz},   {"highpass_order", config.highpass_order},
          {"band_low_hz", config.band_low_hz},   {"band_high_hz", config.band_high_hz},
          {"band_order", config.band_order}};
}

}  // namespace lobster::dsp
