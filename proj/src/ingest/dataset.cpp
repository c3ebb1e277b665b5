#include "lobster/ingest/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <utility>

#include "lobster/common/error.hpp"
#include "lobster/common/io.hpp"

namespace lobster::ingest {
namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

DatasetManifest parse_manifest_csv(std::string_view text, int sample_rate_expected) {
  const auto lines = nonblank_lines(text);
  if (lines.empty()) throw ValidationError("manifest is empty (missing header)");

  const auto header = split_csv_line(lines.front());
  const std::vector<std::string> expected{"path", "individual_id", "sex", "age"};
  std::vector<std::string> normalized;
  for (const auto& h : header) normalized.push_back(lower(trim(h)));
  if (normalized != expected) {
    throw ValidationError("manifest header must be 'path,individual_id,sex,age'");
  }

  DatasetManifest manifest;
  manifest.sample_rate_expected = sample_rate_expected;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != 4) {
      throw ValidationError("manifest line " + std::to_string(i + 1) + ": expected 4 fields");
    }
    ManifestEntry entry;
    entry.path = trim(fields[0]);
    entry.labels.individual_id = trim(fields[1]);
    if (entry.path.empty() || entry.labels.individual_id.empty()) {
      throw ValidationError("manifest line " + std::to_string(i + 1) + ": empty path or id");
    }
    entry.labels.sex = parse_sex(trim(fields[2]));
    entry.labels.age = parse_age(trim(fields[3]));
    manifest.entries.push_back(std::move(entry));
  }
  validate_manifest(manifest);
  return manifest;
}

DatasetManifest read_manifest(const std::filesystem::path& path, int sample_rate_expected) {
  return parse_manifest_csv(read_text(path), sample_rate_expected);
}

std::string write_manifest_csv(const DatasetManifest& manifest) {
  std::string out = "path,individual_id,sex,age\n";
  for (const auto& e : manifest.entries) {
    out += e.path + "," + e.labels.individual_id + "," + to_string(e.labels.sex) + "," +
           to_string(e.labels.age) + "\n";
  }
  return out;
}

void validate_manifest(const DatasetManifest& manifest) {
  if (manifest.sample_rate_expected <= 0) {
    throw ValidationError("expected sample rate must be positive");
  }
  std::set<std::string> paths;
  std::map<std::string, std::pair<Sex, Age>> stratum_of;
  for (const auto& e : manifest.entries) {
    if (!paths.insert(e.path).second) {
      throw ValidationError("manifest lists '" + e.path + "' more than once");
    }
    const auto key = std::make_pair(e.labels.sex, e.labels.age);
    auto [it, inserted] = stratum_of.emplace(e.labels.individual_id, key);
    if (!inserted && it->second != key) {
      throw ValidationError("individual '" + e.labels.individual_id +
                            "' appears in more than one sex/age group");
    }
  }
}

std::vector<AudioSegment> segment_clip(const AudioClip& clip, const IndividualLabels& labels,
                                       int expected_rate) {
  if (clip.sample_rate != expected_rate) {
    throw DataError("sample rate " + std::to_string(clip.sample_rate) + " Hz does not match " +
                    std::to_string(expected_rate) + " Hz (resampling is not supported)");
  }
  const std::size_t window = static_cast<std::size_t>(clip.sample_rate);
  const std::size_t count = clip.samples.size() / window;
  std::vector<AudioSegment> segments;
  segments.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    AudioSegment seg;
    const auto begin = clip.samples.begin() + static_cast<std::ptrdiff_t>(i * window);
    seg.samples.assign(begin, begin + static_cast<std::ptrdiff_t>(window));
    seg.sample_rate = clip.sample_rate;
    seg.labels = labels;
    seg.source_offset = i * window;
    segments.push_back(std::move(seg));
  }
  return segments;
}

std::vector<AudioSegment> load_segments(const DatasetManifest& manifest,
                                        const std::filesystem::path& base_dir) {
  validate_manifest(manifest);
  std::vector<AudioSegment> all;
  for (const auto& entry : manifest.entries) {
    std::filesystem::path path(entry.path);
    if (path.is_relative()) path = base_dir / path;
    const auto clip = read_wav_file(path);
    auto segments = segment_clip(clip, entry.labels, manifest.sample_rate_expected);
    std::move(segments.begin(), segments.end(), std::back_inserter(all));
  }
  return all;
}

}  // namespace lobster::ingest
