#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace clonewatch::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

// Splits on '\n'. A trailing newline does not produce an empty last line,
// and a '\r' before each '\n' is dropped.
std::vector<std::string> split_lines(std::string_view content);

// Throws Error(FileNotFound) when the path does not exist, Error(Io) when it
// cannot be read.
std::string read_file(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes through a temporary sibling and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view content);

// Replaces every invalid UTF-8 sequence with U+FFFD. Returns true when the
// input was already valid.
bool sanitize_utf8(std::string& s);

} // namespace clonewatch::text
