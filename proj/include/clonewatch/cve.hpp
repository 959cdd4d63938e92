#pragma once

#include "clonewatch/commit.hpp"
#include "clonewatch/time.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace clonewatch {

using StopwordSet = std::set<std::string, std::less<>>;

struct CveDescriptor {
  std::string id;
  Timestamp published{};
  std::string description;
  std::vector<std::string> keywords;
  std::vector<std::string> reference_links;
  std::string affected_language;
  std::vector<std::string> affected_projects;
  // false when the flaw lives in an underlying protocol rather than in
  // project code
  bool code_specific = true;
  std::optional<std::string> introduced_version;
  std::optional<std::string> fixed_version;
};

struct IssueRecord {
  std::string issue_id;
  std::set<std::string> state_labels; // lowercase
  std::vector<CommitRef> linked_commits;
  std::string title_and_body;
};

// CVE-YYYY-NNNN with four or more trailing digits.
bool is_cve_id(std::string_view id);

// One token per line; blank lines and '#' comments ignored; lowercased.
StopwordSet load_stopwords(const std::filesystem::path& path);
StopwordSet parse_stopwords(std::string_view content);

// Lowercase alphanumeric tokens minus stopwords, deduplicated and ordered by
// descending frequency, ties by first position. CVE ids in the text are kept
// whole (lowercased), and each one also contributes the token "cve"; both are
// kept even when listed as stopwords.
std::vector<std::string> extract_keywords(std::string_view description,
                                          const StopwordSet& stopwords);

// Reads a descriptor document (JSON). Accepts either a flat record or the
// NVD-style "descriptions"/"references[].url" shapes for the text fields.
CveDescriptor parse_cve(std::string_view document,
                        const StopwordSet& stopwords);
CveDescriptor load_cve(const std::filesystem::path& path,
                       const StopwordSet& stopwords);

inline constexpr std::size_t kDefaultQueryKeywords = 5;

// Alternation of the literal id, "CVE", and the first top_k keywords, each
// regex-escaped. Meant to be compiled case-insensitively (match_fix_commits
// does so).
std::string build_issue_query(const CveDescriptor& cve,
                              std::size_t top_k = kDefaultQueryKeywords);

} // namespace clonewatch
