#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lobster/common/types.hpp"
#include "lobster/ingest/wav.hpp"

namespace lobster::ingest {

struct IndividualLabels {
  std::string individual_id;
  Sex sex = Sex::kMale;
  Age age = Age::kAdult;
};

/// Exactly one second of audio cut from a labelled recording.
struct AudioSegment {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;
  IndividualLabels labels;
  /// Index of the first sample within the source clip.
  std::size_t source_offset = 0;
};

struct ManifestEntry {
  std::string path;
  IndividualLabels labels;
};

/// Maps recordings to individuals. Each individual belongs to exactly one
/// (sex, age) stratum and every path appears once.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  int sample_rate_expected = kDefaultSampleRate;
};

/// Parses the `path,individual_id,sex,age` CSV (labels case-insensitive).
DatasetManifest parse_manifest_csv(std::string_view text,
                                   int sample_rate_expected = kDefaultSampleRate);
DatasetManifest read_manifest(const std::filesystem::path& path,
                              int sample_rate_expected = kDefaultSampleRate);
std::string write_manifest_csv(const DatasetManifest& manifest);

/// Throws ValidationError on duplicate paths or an individual spanning strata.
void validate_manifest(const DatasetManifest& manifest);

/// Non-overlapping 1 s windows; a trailing partial second is dropped. A clip
/// shorter than one second yields no segments. Throws DataError when the clip
/// rate differs from `expected_rate`.
std::vector<AudioSegment> segment_clip(const AudioClip& clip, const IndividualLabels& labels,
                                       int expected_rate = kDefaultSampleRate);

/// Decodes every manifest entry (relative paths resolve against `base_dir`)
/// and concatenates their segments in manifest order.
std::vector<AudioSegment> load_segments(const DatasetManifest& manifest,
                                        const std::filesystem::path& base_dir);

}  // namespace lobster::ingest
