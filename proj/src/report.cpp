#include "clonewatch/report.hpp"

#include "clonewatch/error.hpp"
#include "clonewatch/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>

namespace clonewatch {

using nlohmann::json;

void canonicalize(ScanReport& report) {
  std::stable_sort(report.verdicts.begin(), report.verdicts.end(),
                   [](const ProjectVerdict& a, const ProjectVerdict& b) {
                     return a.project < b.project;
                   });
}

std::string format_processing_time(std::chrono::nanoseconds elapsed) {
  const long long ms =
      std::chrono::round<std::chrono::milliseconds>(elapsed).count();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%03lld", ms / 1000, ms % 1000);
  return buf;
}

namespace {

json match_to_json(const CloneMatch& m) {
  return {{"source_file", m.source_file},
          {"start_line", m.start_line},
          {"end_line", m.end_line},
          {"line_count", m.line_count},
          {"snippet_index", m.snippet_index}};
}

CloneMatch match_from_json(const json& j) {
  CloneMatch m;
  m.source_file = j.at("source_file").get<std::string>();
  m.start_line = j.at("start_line").get<std::size_t>();
  m.end_line = j.at("end_line").get<std::size_t>();
  m.line_count = j.at("line_count").get<std::size_t>();
  m.snippet_index = j.at("snippet_index").get<std::size_t>();
  return m;
}

constexpr std::array kStatusOrder{VerdictStatus::Vulnerable, VerdictStatus::Fixed,
                                  VerdictStatus::NotAffected,
                                  VerdictStatus::FilteredOut, VerdictStatus::Error};

} // namespace

std::string render_json(const ScanReport& report) {
  json verdicts = json::array();
  std::map<std::string, std::size_t> totals;
  for (auto s : kStatusOrder)
    totals[std::string(to_string(s))] = 0;
  for (const auto& v : report.verdicts) {
    json vuln = json::array(), fix = json::array();
    for (const auto& m : v.vuln_matches)
      vuln.push_back(match_to_json(m));
    for (const auto& m : v.fix_matches)
      fix.push_back(match_to_json(m));
    verdicts.push_back({{"project", v.project},
                        {"status", std::string(to_string(v.status))},
                        {"elapsed_ns", v.elapsed.count()},
                        {"diagnostic", v.diagnostic},
                        {"warnings", v.warnings},
                        {"vuln_matches", vuln},
                        {"fix_matches", fix}});
    ++totals[std::string(to_string(v.status))];
  }
  json settings = json::array();
  for (const auto& [name, value] : report.settings)
    settings.push_back({{"name", name}, {"value", value}});
  json doc{{"cve_id", report.cve_id},
           {"scan_timestamp", format_timestamp(report.scan_timestamp)},
           {"tool_version", report.tool_version},
           {"corpus_size", report.corpus_size},
           {"filtered_count", report.filtered_count},
           {"settings", settings},
           {"totals", totals},
           {"verdicts", verdicts}};
  return doc.dump(2) + "\n";
}

void emit_json(const ScanReport& report, const std::filesystem::path& path) {
  text::write_file(path, render_json(report));
}

ScanReport parse_json(std::string_view document) {
  json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw Error(ErrorCode::SchemaViolation, "report is not a JSON object");
  ScanReport r;
  try {
    r.cve_id = doc.at("cve_id").get<std::string>();
    auto ts = parse_timestamp(doc.at("scan_timestamp").get<std::string>());
    if (!ts)
      throw Error(ErrorCode::SchemaViolation, "scan_timestamp");
    r.scan_timestamp = *ts;
    r.tool_version = doc.at("tool_version").get<std::string>();
    r.corpus_size = doc.at("corpus_size").get<std::size_t>();
    r.filtered_count = doc.at("filtered_count").get<std::size_t>();
    for (const auto& s : doc.at("settings"))
      r.settings.emplace_back(s.at("name").get<std::string>(),
                              s.at("value").get<std::string>());
    for (const auto& v : doc.at("verdicts")) {
      ProjectVerdict pv;
      pv.project = v.at("project").get<std::string>();
      pv.status = verdict_status_from_string(v.at("status").get<std::string>());
      pv.elapsed = std::chrono::nanoseconds{v.at("elapsed_ns").get<long long>()};
      pv.diagnostic = v.value("diagnostic", std::string{});
      pv.warnings = v.value("warnings", std::vector<std::string>{});
      for (const auto& m : v.at("vuln_matches"))
        pv.vuln_matches.push_back(match_from_json(m));
      for (const auto& m : v.at("fix_matches"))
        pv.fix_matches.push_back(match_from_json(m));
      r.verdicts.push_back(std::move(pv));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, e.what());
  }
  return r;
}

std::string emit_summary(const ScanReport& report) {
  std::size_t name_width = 7;
  for (const auto& v : report.verdicts)
    name_width = std::max(name_width, v.project.size());
  auto row = [&](std::string_view project, std::string_view status,
                 std::string_view vuln, std::string_view fix,
                 std::string_view time) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  %-12.*s %6.*s %6.*s %10.*s\n",
                  static_cast<int>(status.size()), status.data(),
                  static_cast<int>(vuln.size()), vuln.data(),
                  static_cast<int>(fix.size()), fix.data(),
                  static_cast<int>(time.size()), time.data());
    std::string line(project);
    line.append(name_width - project.size(), ' ');
    return line + buf;
  };

  std::string out = "CVE " + report.cve_id + "  scanned " +
                    format_timestamp(report.scan_timestamp) + "  corpus " +
                    std::to_string(report.corpus_size) + "  candidates " +
                    std::to_string(report.filtered_count) + "\n\n";
  out += row("PROJECT", "STATUS", "VULN", "FIX", "TIME(s)");
  out += std::string(name_width + 39, '-') + "\n";
  std::map<VerdictStatus, std::size_t> totals;
  for (const auto& v : report.verdicts) {
    out += row(v.project, to_string(v.status),
               std::to_string(v.vuln_matches.size()),
               std::to_string(v.fix_matches.size()),
               format_processing_time(v.elapsed));
    ++totals[v.status];
  }
  out += std::string(name_width + 39, '-') + "\n";
  out += "TOTAL:";
  bool first = true;
  for (auto s : kStatusOrder) {
    out += first ? " " : ", ";
    first = false;
    out += std::string(to_string(s)) + " " + std::to_string(totals[s]);
  }
  out += "\n";
  return out;
}

} // namespace clonewatch
