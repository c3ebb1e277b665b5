#include "lobster/features/mfcc.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lobster/common/error.hpp"

namespace lobster::features {
namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

void validate(const MfccConfig& c) {
  if (c.sample_rate <= 0) throw ValidationError("sample rate must be positive");
  if (!is_power_of_two(c.n_fft)) throw ValidationError("n_fft must be a power of two");
  if (c.hop < 1 || c.hop > c.n_fft) throw ValidationError("hop must lie in [1, n_fft]");
  if (c.n_mels < 1) throw ValidationError("n_mels must be positive");
  if (c.n_mfcc < 1 || c.n_mfcc > c.n_mels) throw ValidationError("n_mfcc must lie in [1, n_mels]");
  if (c.fmin < 0.0 || c.fmin >= c.fmax) throw ValidationError("need 0 <= fmin < fmax");
  if (c.fmax > 0.5 * c.sample_rate) throw ValidationError("fmax exceeds the Nyquist frequency");
  if (!(c.log_floor > 0.0)) throw ValidationError("log floor must be positive");
}

void fft_inplace(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  if (!is_power_of_two(static_cast<int>(n))) throw ValidationError("FFT size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        // Twiddles from the angle directly keep the error flat in k.
        const std::complex<double> w = std::polar(1.0, angle * static_cast<double>(k));
        const auto u = data[i + k];
        const auto v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
      }
    }
  }
}

std::vector<double> hann_window(int length) {
  std::vector<double> w(static_cast<std::size_t>(length));
  for (int n = 0; n < length; ++n) {
    w[static_cast<std::size_t>(n)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
  }
  return w;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix stft_power(std::span<const double> segment, const MfccConfig& config) {
  validate(config);
  const auto n_fft = static_cast<std::size_t>(config.n_fft);
  if (segment.size() < n_fft) {
    throw ValidationError("segment of " + std::to_string(segment.size()) +
                          " samples is shorter than n_fft = " + std::to_string(n_fft));
  }
  const auto hop = static_cast<std::size_t>(config.hop);
  const std::size_t frames = 1 + (segment.size() - n_fft) / hop;
  const std::size_t bins = n_fft / 2 + 1;
  const auto window = hann_window(config.n_fft);

  Matrix power(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(bins));
  std::vector<std::complex<double>> buf(n_fft);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < n_fft; ++n) buf[n] = segment[t * hop + n] * window[n];
    fft_inplace(buf);
    for (std::size_t k = 0; k < bins; ++k) {
      power(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = std::norm(buf[k]);
    }
  }
  return power;
}

Matrix mel_filterbank(int n_mels, double fmin, double fmax, int n_fft, int sample_rate) {
  if (n_mels < 1) throw ValidationError("n_mels must be positive");
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= 0.5 * sample_rate)) {
    throw ValidationError("mel filterbank needs 0 <= fmin < fmax <= Nyquist");
  }
  const int bins = n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / (n_mels + 1));
  }

  Matrix fb = Matrix::Zero(n_mels, bins);
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges[static_cast<std::size_t>(m)];
    const double mid = edges[static_cast<std::size_t>(m) + 1];
    const double hi = edges[static_cast<std::size_t>(m) + 2];
    const double norm = 2.0 / (hi - lo);
    double support = 0.0;
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      const double rise = (f - lo) / (mid - lo);
      const double fall = (hi - f) / (hi - mid);
      const double w = std::max(0.0, std::min(rise, fall));
      fb(m, k) = w * norm;
      support += w;
    }
    if (support <= 0.0) {
      throw ValidationError("mel filter " + std::to_string(m) +
                            " covers no FFT bin; reduce n_mels or raise n_fft");
    }
  }
  return fb;
}

Matrix dct_matrix(int n_out, int n_in) {
  Matrix d(n_out, n_in);
  for (int k = 0; k < n_out; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n_in);
    for (int n = 0; n < n_in; ++n) {
      d(k, n) = scale * std::cos(std::numbers::pi * k * (2.0 * n + 1.0) / (2.0 * n_in));
    }
  }
  return d;
}

MfccExtractor::MfccExtractor(const MfccConfig& config) : config_(config) {
  validate(config_);
  filterbank_ = mel_filterbank(config_.n_mels, config_.fmin, config_.fmax, config_.n_fft,
                               config_.sample_rate);
  dct_ = dct_matrix(config_.n_mfcc, config_.n_mels);
}

MfccSequence MfccExtractor::compute(std::span<const double> segment) const {
  const Matrix power = stft_power(segment, config_);
  const Matrix log_mel =
      ((power * filterbank_.transpose()).array() + config_.log_floor).log().matrix();
  return {log_mel * dct_.transpose(), config_};
}

Vector MfccExtractor::pooled(std::span<const double> segment) const {
  return mean_pool(compute(segment));
}

MfccSequence mfcc(std::span<const double> segment, const MfccConfig& config) {
  return MfccExtractor(config).compute(segment);
}

Vector mean_pool(const MfccSequence& sequence) {
  if (sequence.frames.rows() == 0) throw ValidationError("cannot pool an empty MFCC sequence");
  return sequence.frames.colwise().mean().transpose();
}

nlohmann::json to_json(const MfccConfig& c) {
  return {{"n_mfcc", c.n_mfcc},           {"n_fft", c.n_fft},   {"hop", c.hop},
          {"window", "hann"},             {"n_mels", c.n_mels}, {"fmin", c.fmin},
          {"fmax", c.fmax},               {"sample_rate", c.sample_rate},
          {"log_floor", c.log_floor},     {"padding", "none"},  {"mel_scale", "htk"}};
}

}  // namespace lobster::features
