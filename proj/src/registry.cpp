#include "clonewatch/registry.hpp"

#include "clonewatch/error.hpp"
#include "clonewatch/history.hpp"
#include "clonewatch/log.hpp"
#include "clonewatch/text.hpp"

#include <algorithm>

namespace clonewatch {

std::string_view to_string(ForkDateSource source) {
  switch (source) {
  case ForkDateSource::Manifest: return "MANIFEST";
  case ForkDateSource::FirstCommit: return "FIRST_COMMIT";
  case ForkDateSource::ResolvedForkPoint: return "RESOLVED_FORK_POINT";
  }
  return "MANIFEST";
}

ProjectSet::ProjectSet(std::vector<ProjectRecord> records)
    : records_(std::move(records)) {
  std::stable_sort(records_.begin(), records_.end(),
                   [](const ProjectRecord& a, const ProjectRecord& b) {
                     return a.name < b.name;
                   });
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].name.empty())
      throw Error(ErrorCode::InvalidArgument, "project with empty name");
    if (i > 0 && records_[i].name == records_[i - 1].name)
      throw Error(ErrorCode::DuplicateProject, records_[i].name);
  }
}

const ProjectRecord* ProjectSet::find(std::string_view name) const {
  auto it = std::lower_bound(
      records_.begin(), records_.end(), name,
      [](const ProjectRecord& r, std::string_view n) { return r.name < n; });
  if (it != records_.end() && it->name == name)
    return &*it;
  return nullptr;
}

namespace {

// Splits one CSV record. Returns false on an unterminated quote.
bool split_csv(std::string_view line, std::vector<std::string>& fields) {
  fields.clear();
  std::string current;
  bool quoted = false;
  bool field_was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"' && text::trim(current).empty()) {
      current.clear();
      quoted = true;
      field_was_quoted = true;
    } else if (c == ',') {
      fields.push_back(field_was_quoted ? current
                                        : std::string(text::trim(current)));
      current.clear();
      field_was_quoted = false;
    } else {
      current += c;
    }
  }
  if (quoted)
    return false;
  fields.push_back(field_was_quoted ? current
                                    : std::string(text::trim(current)));
  return true;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos &&
      text::trim(value) == value)
    return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"')
      out += '"';
    out += c;
  }
  out += '"';
  return out;
}

constexpr std::string_view kManifestHeader = "name,repo,language,fork_date";

} // namespace

ProjectSet parse_manifest(std::string_view content, Timestamp scan_time) {
  auto lines = text::split_lines(content);
  std::vector<ProjectRecord> records;
  std::vector<std::string> fields;
  bool header_seen = false;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string line_no = std::to_string(i + 1);
    std::string_view line = text::trim(lines[i]);
    if (i == 0 && line.substr(0, 3) == "\xEF\xBB\xBF")
      line.remove_prefix(3);
    if (line.empty() || line.front() == '#')
      continue;
    if (!split_csv(line, fields))
      throw Error(ErrorCode::MalformedManifest,
                  "line " + line_no + ": unterminated quote");
    if (!header_seen) {
      std::string joined;
      for (std::size_t f = 0; f < fields.size(); ++f)
        joined += (f ? "," : "") + text::to_lower(fields[f]);
      if (joined != kManifestHeader)
        throw Error(ErrorCode::MalformedManifest,
                    "line " + line_no + ": expected header " +
                        std::string(kManifestHeader));
      header_seen = true;
      continue;
    }
    if (fields.size() != 4)
      throw Error(ErrorCode::MalformedManifest,
                  "line " + line_no + ": expected 4 fields, found " +
                      std::to_string(fields.size()));

    ProjectRecord record;
    record.name = fields[0];
    record.repo_location = fields[1];
    record.declared_language = fields[2];
    if (record.name.empty())
      throw Error(ErrorCode::MalformedManifest,
                  "line " + line_no + ": empty name");
    if (record.repo_location.empty()) {
      log::warn("manifest line " + line_no + ": skipping '" + record.name +
                "' with no repository location");
      continue;
    }
    if (!fields[3].empty()) {
      auto date = parse_timestamp(fields[3]);
      if (!date)
        throw Error(ErrorCode::MalformedManifest,
                    "line " + line_no + ": bad fork_date '" + fields[3] + "'");
      if (*date > scan_time)
        throw Error(ErrorCode::MalformedManifest,
                    "line " + line_no + ": fork_date in the future");
      record.fork_date = *date;
    }
    record.fork_date_source = ForkDateSource::Manifest;
    records.push_back(std::move(record));
  }
  if (!header_seen)
    throw Error(ErrorCode::MalformedManifest, "line 1: missing header");
  return ProjectSet(std::move(records));
}

ProjectSet load_manifest(const std::filesystem::path& path,
                         Timestamp scan_time) {
  return parse_manifest(text::read_file(path), scan_time);
}

std::string serialize_manifest(const ProjectSet& projects) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& p : projects) {
    out += csv_field(p.name) + ',' + csv_field(p.repo_location) + ',' +
           csv_field(p.declared_language) + ',' +
           (p.fork_date ? format_timestamp(*p.fork_date) : std::string()) +
           '\n';
  }
  return out;
}

bool is_remote_location(std::string_view repo_location) {
  return repo_location.find("://") != std::string_view::npos ||
         repo_location.substr(0, 4) == "git@";
}

std::string resolve_repo_path(const std::string& repo_location,
                              const std::filesystem::path& manifest_dir) {
  if (is_remote_location(repo_location))
    return repo_location;
  std::filesystem::path p(repo_location);
  if (p.is_relative() && !manifest_dir.empty())
    p = manifest_dir / p;
  return p.lexically_normal().string();
}

ProjectSet filter_by_language(const ProjectSet& projects,
                              std::string_view language) {
  if (language.empty())
    throw Error(ErrorCode::InvalidArgument, "empty language tag");
  std::vector<ProjectRecord> kept;
  for (const auto& p : projects)
    if (text::iequals(p.declared_language, language))
      kept.push_back(p);
  return ProjectSet(std::move(kept));
}

ProjectRecord resolve_fork_date(const ProjectRecord& project,
                                const RepositoryHandle& history) {
  if (project.fork_date)
    return project;
  ProjectRecord resolved = project;
  resolved.fork_date = history.earliest_commit_time();
  resolved.fork_date_source = ForkDateSource::FirstCommit;
  return resolved;
}

ProjectSet filter_candidates(const ProjectSet& projects,
                             const VulnWindow& window) {
  std::vector<ProjectRecord> kept;
  for (const auto& p : projects) {
    if (!p.fork_date)
      throw Error(ErrorCode::UnresolvedForkDate, p.name);
    if (window.contains(*p.fork_date))
      kept.push_back(p);
  }
  return ProjectSet(std::move(kept));
}

} // namespace clonewatch
