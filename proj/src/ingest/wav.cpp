#include "lobster/ingest/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "lobster/common/io.hpp"

namespace lobster::ingest {
namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

[[noreturn]] void malformed(const std::string& what) {
  throw WavError(WavErrorKind::kMalformedHeader, "malformed WAV: " + what);
}

}  // namespace

AudioClip decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    malformed("missing RIFF/WAVE signature");
  }

  bool have_fmt = false;
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (size > bytes.size() - body) {
      // Streaming writers sometimes leave a too-large data size; clamp it.
      if (tag_is(bytes, pos, "data")) {
        data = bytes.subspan(body);
        have_data = true;
        break;
      }
      malformed("chunk overruns file");
    }
    if (tag_is(bytes, pos, "fmt ")) {
      if (size < 16) malformed("fmt chunk too short");
      format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      rate = read_u32(bytes, body + 4);
      bits = read_u16(bytes, body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) malformed("extensible fmt chunk too short");
        format = read_u16(bytes, body + 24);
      }
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      data = bytes.subspan(body, size);
      have_data = true;
    }
    pos = body + size + (size & 1U);
  }

  if (!have_fmt) malformed("no fmt chunk");
  if (!have_data) malformed("no data chunk");
  if (channels == 0) malformed("zero channels");
  if (rate == 0) malformed("zero sample rate");

  std::size_t width = 0;
  if (format == kFormatPcm && bits == 16) {
    width = 2;
  } else if (format == kFormatFloat && bits == 32) {
    width = 4;
  } else {
    throw WavError(WavErrorKind::kUnsupportedCodec,
                   "unsupported WAV codec (format " + std::to_string(format) + ", " +
                       std::to_string(bits) + " bits); expected PCM16 or float32");
  }

  const std::size_t frame = width * channels;
  const std::size_t frames = data.size() / frame;
  if (frames == 0) throw WavError(WavErrorKind::kEmptyData, "WAV data chunk holds no samples");

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t at = f * frame + c * width;
      if (width == 2) {
        acc += static_cast<std::int16_t>(read_u16(data, at)) / 32768.0;
      } else {
        const std::uint32_t raw = read_u32(data, at);
        float value;
        std::memcpy(&value, &raw, sizeof(value));
        if (!std::isfinite(value)) throw DataError("non-finite float sample in WAV data");
        acc += std::clamp(static_cast<double>(value), -1.0, 1.0);
      }
    }
    clip.samples[f] = acc / channels;
  }
  return clip;
}

std::vector<std::uint8_t> encode_wav_channels(const std::vector<std::vector<double>>& channels,
                                              int sample_rate, WavSampleFormat format) {
  if (channels.empty()) throw ValidationError("encode_wav needs at least one channel");
  if (sample_rate <= 0) throw ValidationError("sample rate must be positive");
  const std::size_t frames = channels.front().size();
  for (const auto& ch : channels) {
    if (ch.size() != frames) throw ValidationError("channels differ in length");
  }
  const std::uint16_t n_channels = static_cast<std::uint16_t>(channels.size());
  const std::uint16_t width = format == WavSampleFormat::kPcm16 ? 2 : 4;
  const std::uint32_t data_size = static_cast<std::uint32_t>(frames * n_channels * width);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, format == WavSampleFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, n_channels);
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * n_channels * width);
  put_u16(out, static_cast<std::uint16_t>(n_channels * width));
  put_u16(out, static_cast<std::uint16_t>(width * 8));
  put_tag(out, "data");
  put_u32(out, data_size);

  for (std::size_t f = 0; f < frames; ++f) {
    for (const auto& ch : channels) {
      const double v = ch[f];
      if (format == WavSampleFormat::kPcm16) {
        const double scaled = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
      } else {
        const float value = static_cast<float>(v);
        std::uint32_t raw;
        std::memcpy(&raw, &value, sizeof(raw));
        put_u32(out, raw);
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, WavSampleFormat format) {
  return encode_wav_channels({clip.samples}, clip.sample_rate, format);
}

AudioClip read_wav_file(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  try {
    return decode_wav(bytes);
  } catch (const WavError& e) {
    throw WavError(e.wav_kind(), path.string() + ": " + e.what());
  }
}

void write_wav_file(const std::filesystem::path& path, const AudioClip& clip,
                    WavSampleFormat format) {
  atomic_write(path, encode_wav(clip, format));
}

}  // namespace lobster::ingest
