#pragma once

#include "clonewatch/clonedetect.hpp"
#include "clonewatch/time.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace clonewatch {

struct ScanReport {
  std::string cve_id;
  Timestamp scan_timestamp{};
  std::string tool_version;
  // projects monitored for the CVE's language
  std::size_t corpus_size = 0;
  // projects left for clone detection after the fork-date filter
  std::size_t filtered_count = 0;
  std::vector<ProjectVerdict> verdicts; // ordered by project name
  // effective configuration, flattened to name/value pairs
  std::vector<std::pair<std::string, std::string>> settings;
};

// Orders verdicts by project name.
void canonicalize(ScanReport& report);

// processingTime rendering: seconds with three decimals.
std::string format_processing_time(std::chrono::nanoseconds elapsed);

std::string render_xml(const ScanReport& report);
void emit_xml(const ScanReport& report, const std::filesystem::path& path);

// Reads a document produced by render_xml. elapsed comes back at millisecond
// resolution. Throws Error(SchemaViolation) on malformed input.
ScanReport parse_xml(std::string_view document);

// Checks a report document against the rules of schema/clonewatch-report.xsd
// plus the verdict invariants the schema cannot express. Returns one message
// per violation; empty means valid.
std::vector<std::string> validate_xml(std::string_view document);

std::string render_json(const ScanReport& report);
void emit_json(const ScanReport& report, const std::filesystem::path& path);
ScanReport parse_json(std::string_view document);

// Fixed-width table of project, status, match counts and time, with a
// footer of totals per status.
std::string emit_summary(const ScanReport& report);

} // namespace clonewatch
