#include "lobster/common/json_arrays.hpp"

#include <array>
#include <cstring>

#include "lobster/common/error.hpp"

namespace lobster {
namespace {

constexpr char kAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

}  // namespace

std::string base64_encode(std::span<const unsigned char> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back(kAlphabet[v & 63]);
  }
  if (i < bytes.size()) {
    unsigned v = bytes[i] << 16;
    if (i + 1 < bytes.size()) v |= bytes[i + 1] << 8;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(i + 1 < bytes.size() ? kAlphabet[(v >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  std::vector<unsigned char> out;
  unsigned buffer = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    const int value = decode_char(c);
    if (value < 0) throw DataError("invalid base64 character");
    buffer = (buffer << 6) | static_cast<unsigned>(value);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((buffer >> bits) & 0xff));
    }
  }
  return out;
}

nlohmann::json encode_array(std::span<const double> values, ArrayEncoding encoding) {
  if (encoding == ArrayEncoding::kDecimal) {
    return nlohmann::json(std::vector<double>(values.begin(), values.end()));
  }
  std::vector<unsigned char> bytes(values.size() * sizeof(double));
  // Little-endian host assumed (x86-64 / aarch64).
  std::memcpy(bytes.data(), values.data(), bytes.size());
  return nlohmann::json{{"b64", base64_encode(bytes)}};
}

std::vector<double> decode_array(const nlohmann::json& node) {
  if (node.is_array()) return node.get<std::vector<double>>();
  if (node.is_object() && node.contains("b64")) {
    const auto bytes = base64_decode(node.at("b64").get<std::string>());
    if (bytes.size() % sizeof(double) != 0) throw DataError("base64 array has ragged length");
    std::vector<double> values(bytes.size() / sizeof(double));
    std::memcpy(values.data(), bytes.data(), bytes.size());
    return values;
  }
  throw DataError("expected numeric array or {\"b64\": ...}");
}

nlohmann::json encode_vector(const Vector& values, ArrayEncoding encoding) {
  return encode_array(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())),
                      encoding);
}

Vector decode_vector(const nlohmann::json& node) {
  const auto values = decode_array(node);
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json encode_matrix(const Matrix& values, ArrayEncoding encoding) {
  std::vector<double> flat(static_cast<std::size_t>(values.size()));
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) flat[k++] = values(r, c);
  }
  return nlohmann::json{{"rows", values.rows()}, {"cols", values.cols()},
                        {"data", encode_array(flat, encoding)}};
}

Matrix decode_matrix(const nlohmann::json& node) {
  const auto rows = node.at("rows").get<Eigen::Index>();
  const auto cols = node.at("cols").get<Eigen::Index>();
  const auto flat = decode_array(node.at("data"));
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
    throw DataError("matrix payload size does not match its shape");
  }
  Matrix out(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = flat[k++];
  }
  return out;
}

}  // namespace lobster
