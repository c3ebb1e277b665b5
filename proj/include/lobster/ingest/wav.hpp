#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lobster/common/error.hpp"

namespace lobster::ingest {

/// Mono waveform with amplitudes in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

enum class WavErrorKind {
  kMalformedHeader,
  kUnsupportedCodec,
  kEmptyData,
};

class WavError : public DataError {
 public:
  WavError(WavErrorKind kind, const std::string& what) : DataError(what), kind_(kind) {}
  WavErrorKind wav_kind() const noexcept { return kind_; }

 private:
  WavErrorKind kind_;
};

enum class WavSampleFormat { kPcm16, kFloat32 };

/// Parses RIFF/WAVE (PCM16 or IEEE float32, any channel count). Channels are
/// averaged to mono; PCM16 is scaled by 1/32768.
AudioClip decode_wav(std::span<const std::uint8_t> bytes);

/// Mono RIFF/WAVE. PCM16 rounds to nearest and saturates at full scale.
std::vector<std::uint8_t> encode_wav(const AudioClip& clip,
                                     WavSampleFormat format = WavSampleFormat::kPcm16);

/// Interleaved multichannel writer, mainly for tests and fixtures.
std::vector<std::uint8_t> encode_wav_channels(const std::vector<std::vector<double>>& channels,
                                              int sample_rate, WavSampleFormat format);

AudioClip read_wav_file(const std::filesystem::path& path);
void write_wav_file(const std::filesystem::path& path, const AudioClip& clip,
                    WavSampleFormat format = WavSampleFormat::kPcm16);

}  // namespace lobster::ingest
