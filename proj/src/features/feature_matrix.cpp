#include "lobster/features/feature_matrix.hpp"

#include <cstdio>
#include <cstring>
#include <string>

#include "lobster/common/error.hpp"
#include "lobster/common/io.hpp"

namespace lobster::features {
namespace {

constexpr char kMagic[4] = {'L', 'B', 'F', 'M'};
constexpr std::uint32_t kBinaryVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  unsigned char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("feature container is truncated");
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void FeatureMatrix::check() const {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (rows.rows() != n || static_cast<Eigen::Index>(groups.size()) != n) {
    throw ValidationError("feature matrix rows, labels and groups disagree in length");
  }
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != rows.cols()) {
    throw ValidationError("feature names do not match the column count");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("labels must be binary (0 or 1)");
  }
}

FeatureMatrix FeatureMatrix::subset(const std::vector<std::size_t>& indices) const {
  FeatureMatrix out;
  out.rows.resize(static_cast<Eigen::Index>(indices.size()), rows.cols());
  out.feature_names = feature_names;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.rows.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(indices[i]));
    out.labels.push_back(labels[indices[i]]);
    out.groups.push_back(groups[indices[i]]);
  }
  return out;
}

std::vector<std::string> default_feature_names(Eigen::Index d) {
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < d; ++i) names.push_back("f" + std::to_string(i));
  return names;
}

std::string write_feature_csv(const FeatureMatrix& features) {
  features.check();
  std::string out;
  for (Eigen::Index c = 0; c < features.dim(); ++c) out += "f" + std::to_string(c) + ",";
  out += "label,group\n";
  for (std::size_t r = 0; r < features.size(); ++r) {
    for (Eigen::Index c = 0; c < features.dim(); ++c) {
      out += number(features.rows(static_cast<Eigen::Index>(r), c)) + ",";
    }
    out += std::to_string(features.labels[r]) + "," + csv_escape(features.groups[r]) + "\n";
  }
  return out;
}

FeatureMatrix parse_feature_csv(std::string_view text) {
  const auto lines = nonblank_lines(text);
  if (lines.empty()) throw ValidationError("feature CSV is empty");
  const auto header = split_csv_line(lines.front());
  if (header.size() < 3 || header[header.size() - 2] != "label" || header.back() != "group") {
    throw ValidationError("feature CSV header must be f0..f{d-1},label,group");
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t c = 0; c < d; ++c) {
    if (header[c] != "f" + std::to_string(c)) {
      throw ValidationError("feature CSV column " + std::to_string(c) + " must be named f" +
                            std::to_string(c));
    }
  }
  FeatureMatrix fm;
  fm.rows.resize(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(d));
  fm.feature_names = default_feature_names(static_cast<Eigen::Index>(d));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != d + 2) {
      throw DataError("feature CSV line " + std::to_string(i + 1) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(d + 2));
    }
    try {
      for (std::size_t c = 0; c < d; ++c) {
        fm.rows(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(c)) =
            std::stod(fields[c]);
      }
      fm.labels.push_back(std::stoi(fields[d]));
    } catch (const std::logic_error&) {
      throw DataError("feature CSV line " + std::to_string(i + 1) + " is not numeric");
    }
    fm.groups.push_back(fields[d + 1]);
  }
  fm.check();
  return fm;
}

std::vector<std::uint8_t> write_feature_binary(const FeatureMatrix& features) {
  features.check();
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put<std::uint32_t>(out, kBinaryVersion);
  put<std::uint64_t>(out, features.size());
  put<std::uint64_t>(out, static_cast<std::uint64_t>(features.dim()));
  for (std::size_t r = 0; r < features.size(); ++r) {
    for (Eigen::Index c = 0; c < features.dim(); ++c) {
      put<double>(out, features.rows(static_cast<Eigen::Index>(r), c));
    }
  }
  for (int y : features.labels) put<std::int32_t>(out, y);
  for (const auto& g : features.groups) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.size()));
    out.insert(out.end(), g.begin(), g.end());
  }
  return out;
}

FeatureMatrix parse_feature_binary(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DataError("not a feature container (bad magic)");
  }
  Reader in(bytes);
  in.string(4);
  if (in.get<std::uint32_t>() != kBinaryVersion) throw DataError("unsupported container version");
  const auto n = in.get<std::uint64_t>();
  const auto d = in.get<std::uint64_t>();
  if (d > 0 && n > (bytes.size() / 8) / d) throw DataError("feature container shape too large");
  FeatureMatrix fm;
  fm.rows.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  fm.feature_names = default_feature_names(static_cast<Eigen::Index>(d));
  for (std::uint64_t r = 0; r < n; ++r) {
    for (std::uint64_t c = 0; c < d; ++c) {
      fm.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = in.get<double>();
    }
  }
  for (std::uint64_t r = 0; r < n; ++r) fm.labels.push_back(in.get<std::int32_t>());
  for (std::uint64_t r = 0; r < n; ++r) fm.groups.push_back(in.string(in.get<std::uint32_t>()));
  if (!in.done()) throw DataError("trailing bytes after feature container");
  fm.check();
  return fm;
}

void save_features(const std::filesystem::path& path, const FeatureMatrix& features) {
  if (path.extension() == ".lbfm") {
    atomic_write(path, write_feature_binary(features));
  } else {
    atomic_write(path, write_feature_csv(features));
  }
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  if (path.extension() == ".lbfm") return parse_feature_binary(read_bytes(path));
  return parse_feature_csv(read_text(path));
}

}  // namespace lobster::features
