#pragma once

#include <json.hpp>

#include <span>
#include <string>
#include <vector>

#include "lobster/common/types.hpp"

namespace lobster {

/// How numeric arrays are written into JSON envelopes.
enum class ArrayEncoding {
  kDecimal,  ///< plain JSON numbers, round-trip exact via %.17g
  kBase64,   ///< {"b64": "..."} over little-endian float64
};

nlohmann::json encode_array(std::span<const double> values, ArrayEncoding encoding);
/// Accepts either encoding.
std::vector<double> decode_array(const nlohmann::json& node);

nlohmann::json encode_vector(const Vector& values, ArrayEncoding encoding);
Vector decode_vector(const nlohmann::json& node);

/// Row-major {"rows", "cols", "data"}.
nlohmann::json encode_matrix(const Matrix& values, ArrayEncoding encoding);
Matrix decode_matrix(const nlohmann::json& node);

std::string base64_encode(std::span<const unsigned char> bytes);
std::vector<unsigned char> base64_decode(const std::string& text);

}  // namespace lobster
