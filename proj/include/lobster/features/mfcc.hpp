#pragma once

#include <complex>
#include <span>
#include <vector>

#include <json.hpp>

#include "lobster/common/types.hpp"

namespace lobster::features {

/// MFCC front-end settings. Frames are not centred or padded: a segment of
/// length L yields 1 + floor((L - n_fft) / hop) frames.
struct MfccConfig {
  int n_mfcc = 40;
  /// Power of two.
  int n_fft = 2048;
  int hop = 512;
  int n_mels = 128;
  double fmin = 50.0;
  double fmax = 8000.0;
  int sample_rate = kDefaultSampleRate;
  /// Floor added to mel power before the log.
  double log_floor = 1e-10;
};

/// Throws ValidationError when an invariant of MfccConfig is violated.
void validate(const MfccConfig& config);

struct MfccSequence {
  /// T x n_mfcc.
  Matrix frames;
  MfccConfig config;
};

/// In-place iterative radix-2 FFT; size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& data);

/// Periodic Hann window.
std::vector<double> hann_window(int length);

/// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// T x (n_fft/2 + 1) power spectrogram of Hann-windowed frames.
/// Throws ValidationError when the segment is shorter than n_fft.
Matrix stft_power(std::span<const double> segment, const MfccConfig& config);

/// Triangular filters equally spaced in mel between fmin and fmax, each scaled
/// by 2 / (upper edge - lower edge). Throws ValidationError when a filter
/// covers no FFT bin.
Matrix mel_filterbank(int n_mels, double fmin, double fmax, int n_fft, int sample_rate);

/// Orthonormal DCT-II rows 0..n_out-1 for inputs of length n_in.
Matrix dct_matrix(int n_out, int n_in);

/// Reusable extractor that caches the window, filterbank and DCT basis.
class MfccExtractor {
 public:
  explicit MfccExtractor(const MfccConfig& config);

  const MfccConfig& config() const { return config_; }
  MfccSequence compute(std::span<const double> segment) const;
  /// Time-averaged coefficients.
  Vector pooled(std::span<const double> segment) const;

 private:
  MfccConfig config_;
  Matrix filterbank_;
  Matrix dct_;
};

MfccSequence mfcc(std::span<const double> segment, const MfccConfig& config);

/// Mean over frames. Throws ValidationError on an empty sequence.
Vector mean_pool(const MfccSequence& sequence);

nlohmann::json to_json(const MfccConfig& config);

}  // namespace lobster::features
