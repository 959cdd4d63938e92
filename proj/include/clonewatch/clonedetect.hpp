#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace clonewatch {

struct DetectionTest;

// Rules that reduce source text to its Type I comparable form.
struct NormalizationProfile {
  std::vector<std::string> line_comment_markers{"//"};
  std::vector<std::pair<std::string, std::string>> block_comment_delims{
      {"/*", "*/"}};
  bool collapse_internal_whitespace = true;
  bool drop_blank_lines = true;
  // Characters that open a literal in which comment markers are inert. A
  // literal never spans lines. A quote directly after an alphanumeric
  // character (C++14 digit separator) opens nothing.
  std::string quote_chars = "\"'";

  // Throws Error(InvalidArgument) on empty markers or delimiters.
  void validate() const;

  bool operator==(const NormalizationProfile&) const = default;
};

struct NormalizedFile {
  std::string path;
  std::vector<std::string> lines;
  // 1-based original line number of each normalized line.
  std::vector<std::size_t> line_map;
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return lines.size(); }
};

NormalizedFile normalize_source(std::span<const std::string> raw,
                                const NormalizationProfile& profile,
                                std::string path = {});

struct CloneMatch {
  std::string source_file;
  std::size_t start_line = 0;
  std::size_t end_line = 0;
  std::size_t line_count = 0;
  std::size_t snippet_index = 0;

  bool operator==(const CloneMatch&) const = default;
};

// Every position where the whole needle occurs as a contiguous run of
// normalized lines, overlapping occurrences included. threshold must equal
// needle.size(); anything else throws Error(InvalidArgument).
std::vector<CloneMatch> find_clones(std::span<const std::string> needle,
                                    const NormalizedFile& haystack,
                                    std::size_t threshold,
                                    std::size_t snippet_index = 0);

enum class VerdictStatus { Vulnerable, Fixed, NotAffected, FilteredOut, Error };

std::string_view to_string(VerdictStatus status);
// Throws Error(SchemaViolation) on an unknown name.
VerdictStatus verdict_status_from_string(std::string_view name);

struct ProjectVerdict {
  std::string project;
  VerdictStatus status = VerdictStatus::NotAffected;
  std::vector<CloneMatch> vuln_matches;
  std::vector<CloneMatch> fix_matches;
  std::chrono::nanoseconds elapsed{0};
  // Set for ERROR and FILTERED_OUT verdicts.
  std::string diagnostic;
  std::vector<std::string> warnings;
};

// Which files a scan reads, as fnmatch(3) patterns over '/'-separated paths
// relative to the project root.
struct FileSelection {
  std::vector<std::string> include;
  std::vector<std::string> exclude;

  bool selects(std::string_view relative_path) const;
};

// Extension globs for a language tag (case-insensitive). Unknown tags select
// every file; binary files are skipped during reading anyway.
std::vector<std::string> default_globs(std::string_view language);

// Sorted relative paths of all selected regular files below root. VCS
// metadata directories are never entered.
std::vector<std::string> list_source_files(const std::filesystem::path& root,
                                           const FileSelection& selection);

// Reads and normalizes one file; returns false (with a warning appended)
// when the file is unreadable or binary.
bool load_normalized(const std::filesystem::path& root,
                     const std::string& relative_path,
                     const NormalizationProfile& profile, NormalizedFile& out,
                     std::vector<std::string>& warnings);

// VULNERABLE iff any vulnerable snippet matches and no fix snippet does;
// FIXED iff any fix snippet matches; NOT_AFFECTED otherwise. An unreadable
// root yields ERROR.
ProjectVerdict scan_project(const DetectionTest& test,
                            const std::string& project_name,
                            const std::filesystem::path& project_root,
                            const NormalizationProfile& profile,
                            const FileSelection& selection);

struct CloneRatioResult {
  std::string target;
  std::string reference;
  std::size_t cloned_lines = 0; // K
  std::size_t total_lines = 0;  // T
  std::size_t min_block = 0;

  double ratio() const noexcept {
    return total_lines == 0 ? 0.0
                            : static_cast<double>(cloned_lines) /
                                  static_cast<double>(total_lines);
  }
};

inline constexpr std::size_t kDefaultMinBlock = 6;

// K counts target lines covered by a common block of at least min_block
// normalized lines shared with any reference file; a target file that is
// identical in full to a reference file counts entirely, whatever its
// length. Throws Error(EmptyTarget) when T is 0 and Error(InvalidArgument)
// when min_block < 2.
CloneRatioResult clone_ratio(const std::filesystem::path& target_root,
                             const std::filesystem::path& reference_root,
                             const NormalizationProfile& profile,
                             std::size_t min_block,
                             const FileSelection& selection);

// Same measure over already-normalized files.
CloneRatioResult clone_ratio(std::span<const NormalizedFile> target,
                             std::span<const NormalizedFile> reference,
                             std::size_t min_block);

} // namespace clonewatch
