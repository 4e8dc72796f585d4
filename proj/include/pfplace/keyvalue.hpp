#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pfplace {

// One "key = value" line of a structured text config. Keys may repeat.
struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

// Parses "key = value" lines; '#' starts a comment, blank lines are skipped.
// Malformed lines raise FormatError naming the line number.
std::vector<KeyValue> parse_key_values(std::string_view text);
std::vector<KeyValue> read_key_values(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

std::vector<std::string> split_ws(std::string_view text);
std::string_view trim(std::string_view text);

// Strict numeric parsing: the whole token must be consumed.
bool parse_double(std::string_view token, double& out);
bool parse_size(std::string_view token, std::size_t& out);
bool parse_int(std::string_view token, long long& out);

// Shortest decimal text that round-trips the double exactly.
std::string format_double(double value);

}  // namespace pfplace
