#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lobster/common/types.hpp"

namespace lobster::features {

/// N x d features with a binary label and an individual id per row.
struct FeatureMatrix {
  Matrix rows;
  Labels labels;
  std::vector<std::string> groups;
  std::vector<std::string> feature_names;

  std::size_t size() const { return labels.size(); }
  Eigen::Index dim() const { return rows.cols(); }

  /// Throws ValidationError when the row, label, group and name counts disagree.
  void check() const;
  FeatureMatrix subset(const std::vector<std::size_t>& indices) const;
};

std::vector<std::string> default_feature_names(Eigen::Index d);

/// CSV with header `f0,...,f{d-1},label,group`; values written with %.17g.
std::string write_feature_csv(const FeatureMatrix& features);
FeatureMatrix parse_feature_csv(std::string_view text);

/// Little-endian container:
///   magic "LBFM", u32 version (1), u64 N, u64 d, N*d float64 row-major,
///   N int32 labels, then N groups each as u32 length + UTF-8 bytes.
std::vector<std::uint8_t> write_feature_binary(const FeatureMatrix& features);
FeatureMatrix parse_feature_binary(const std::vector<std::uint8_t>& bytes);

/// Picks the format from the extension (.csv or .lbfm).
void save_features(const std::filesystem::path& path, const FeatureMatrix& features);
FeatureMatrix load_features(const std::filesystem::path& path);

}  // namespace lobster::features
