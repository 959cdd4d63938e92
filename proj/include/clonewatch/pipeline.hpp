#pragma once

#include "clonewatch/clonedetect.hpp"
#include "clonewatch/commit.hpp"
#include "clonewatch/error.hpp"
#include "clonewatch/history.hpp"
#include "clonewatch/registry.hpp"
#include "clonewatch/report.hpp"
#include "clonewatch/testgen.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

// The end-to-end scan, one function per CLI subcommand. Each stage persists
// its result under ScanConfig::output_dir so the manual annotation step can
// sit between `szz` and `scan`.
namespace clonewatch {

std::string_view tool_version();

// Directory holding the shipped data files (stopwords.txt).
std::filesystem::path default_data_dir();

struct ScanConfig {
  std::filesystem::path cve_descriptor_path;
  std::filesystem::path manifest_path;
  std::filesystem::path issue_export_path;
  std::filesystem::path parent_repo_path;
  std::string parent_branch = "HEAD";
  std::optional<std::filesystem::path> detection_test_path;
  std::optional<std::filesystem::path> window_path;
  std::filesystem::path annotations_path;
  std::filesystem::path stopwords_path;
  std::filesystem::path output_dir = "clonewatch-out";
  NormalizationProfile profile;
  std::vector<std::string> file_globs;
  std::vector<std::string> exclude_globs;
  std::size_t parallelism = 1;
  std::string language_filter;
  std::size_t min_block = kDefaultMinBlock;
  std::size_t query_keywords = kDefaultQueryKeywords;

  std::filesystem::path effective_stopwords() const;
  std::filesystem::path effective_window() const;
  std::filesystem::path effective_test() const;

  // Throws Error(InvalidArgument) when parallelism is 0 or min_block < 2.
  void validate() const;
};

// JSON config file. Relative paths are taken relative to the file's
// directory; keys that are absent keep the values already in base.
ScanConfig load_config(const std::filesystem::path& path, ScanConfig base = {});

// An Error tagged with the pipeline stage that raised it.
class StageError : public Error {
public:
  StageError(std::string stage, const Error& cause);
  const std::string& stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

struct SzzResult {
  std::string pattern;
  std::vector<MatchedFix> fixes;
  VulnWindow window;
  std::filesystem::path window_file;
};

// read_issues -> match_fix_commits -> blame_previous_commits ->
// compute_window; writes <out>/window.json.
SzzResult run_szz(const ScanConfig& config);

enum class FilterDecision { Included, BeforeWindow, AfterWindow, Error };

std::string_view to_string(FilterDecision decision);

struct CandidateEntry {
  ProjectRecord project; // repo_location resolved against the manifest
  FilterDecision decision = FilterDecision::Error;
  std::string reason;
};

struct FilterResult {
  std::size_t manifest_size = 0;
  ProjectSet corpus;     // after the language filter
  ProjectSet candidates; // in-window projects
  std::vector<CandidateEntry> entries; // one per corpus project, by name
  std::filesystem::path candidates_file;
  std::filesystem::path decisions_file;
};

// Language filter, fork-date resolution and window filter; writes
// <out>/candidates.csv (included rows only) and <out>/filter.json (every
// decision with its reason). Projects whose fork date cannot be resolved are
// listed as ERROR rather than failing the stage.
FilterResult run_filter(const ScanConfig& config, const VulnWindow& window,
                        std::string_view language);

struct ScanOutcome {
  ScanReport report;
  FilterResult filter;
  int exit_code = 0; // 0 clean, 2 when any project is VULNERABLE
  std::filesystem::path xml_file;
  std::filesystem::path json_file;
  std::filesystem::path summary_file;
};

ScanOutcome run_scan(const ScanConfig& config);

CloneRatioResult run_ratio(const ScanConfig& config,
                           const std::filesystem::path& target,
                           const std::filesystem::path& reference);

// Annotation file: {"vulnerable": [...], "fix": [...]} where each entry is
// either {"lines": [...]} with optional commit/file/start_line, or
// {"commit", "file", "start_line", "end_line"} read from the parent repo.
DetectionTest run_build_test(const ScanConfig& config);

} // namespace clonewatch
