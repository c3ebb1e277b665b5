#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lobster {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written artifact. Parent directories are created.
void atomic_write(const std::filesystem::path& path, std::string_view contents);
void atomic_write(const std::filesystem::path& path, const std::vector<std::uint8_t>& contents);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

/// Quotes a field when it contains a comma or quote.
std::string csv_escape(const std::string& field);

/// Lines of `text` with trailing '\r' removed; blank lines dropped.
std::vector<std::string> nonblank_lines(std::string_view text);

/// printf-style "%.*f".
std::string format_fixed(double value, int decimals);

}  // namespace lobster
