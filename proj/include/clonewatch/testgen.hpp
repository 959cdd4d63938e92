#pragma once

#include "clonewatch/clonedetect.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace clonewatch {

struct CveDescriptor;

enum class SnippetLabel { Vulnerable, Fix };

std::string_view to_string(SnippetLabel label);

struct SnippetOrigin {
  std::string commit;
  std::string file;
  std::size_t start_line = 0;

  bool operator==(const SnippetOrigin&) const = default;
};

// One annotated fragment. normalized and threshold are derived from
// source_lines and never edited independently.
struct CodeSnippet {
  SnippetLabel label = SnippetLabel::Vulnerable;
  std::vector<std::string> source_lines;
  SnippetOrigin origin;
  std::vector<std::string> normalized;
  std::size_t threshold = 0;

  bool operator==(const CodeSnippet&) const = default;
};

struct DetectionTest {
  std::string cve_id;
  std::string language;
  NormalizationProfile profile;
  std::vector<CodeSnippet> vulnerable_snippets;
  std::vector<CodeSnippet> fix_snippets;

  std::vector<std::size_t> vulnerable_thresholds() const;
  std::vector<std::size_t> fix_thresholds() const;

  bool operator==(const DetectionTest&) const = default;
};

struct Fragment {
  std::vector<std::string> lines;
  SnippetOrigin origin;
};

// Normalizes each fragment and fixes its threshold at the normalized length.
// Throws Error(EmptyAfterNormalization, "vulnerable[i]" / "fix[i]") for a
// fragment with no code left, Error(InvalidArgument) when either list is
// empty.
DetectionTest build_detection_test(const CveDescriptor& cve,
                                   const std::vector<Fragment>& vuln_fragments,
                                   const std::vector<Fragment>& fix_fragments,
                                   const NormalizationProfile& profile = {});

std::string serialize_test(const DetectionTest& test);
// Re-derives every snippet's normalized lines from its raw lines and rejects
// a stored threshold that disagrees (SCHEMA_VIOLATION).
DetectionTest deserialize_test(std::string_view document);

void save_test(const DetectionTest& test, const std::filesystem::path& path);
DetectionTest load_test(const std::filesystem::path& path);

} // namespace clonewatch
