#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ixtune::util {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Case-insensitive identifier equality (ASCII, inputs assumed trimmed).
bool ieq(std::string_view a, std::string_view b);

/// Case-insensitive ordering; ties broken case-sensitively so distinct
/// spellings still order deterministically.
bool iless(std::string_view a, std::string_view b);

std::uint64_t fnv1a64(std::string_view data);
std::string to_hex(std::uint64_t value, int digits);

/// Shortest locale-independent decimal rendering, stable across calls.
std::string format_number(double v);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Replaces every occurrence of `{{key}}` in `text`.
std::string replace_placeholder(std::string text, std::string_view key,
                                std::string_view value);

/// True if `word` occurs in `text` as a standalone identifier token,
/// compared case-insensitively.
bool contains_identifier(std::string_view text, std::string_view word);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace ixtune::util
