#pragma once

#include "clonewatch/commit.hpp"
#include "clonewatch/time.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace clonewatch {

class RepositoryHandle;

enum class ForkDateSource { Manifest, FirstCommit, ResolvedForkPoint };

std::string_view to_string(ForkDateSource source);

struct ProjectRecord {
  std::string name;
  std::string repo_location;
  std::string declared_language;
  std::optional<Timestamp> fork_date;
  ForkDateSource fork_date_source = ForkDateSource::Manifest;

  bool operator==(const ProjectRecord&) const = default;
};

// Immutable, name-ordered collection of monitored projects.
class ProjectSet {
public:
  ProjectSet() = default;
  // Sorts by name; throws Error(DuplicateProject, name) on a repeated name
  // and Error(InvalidArgument) on an empty one.
  explicit ProjectSet(std::vector<ProjectRecord> records);

  auto begin() const noexcept { return records_.begin(); }
  auto end() const noexcept { return records_.end(); }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const ProjectRecord& operator[](std::size_t i) const { return records_[i]; }
  const std::vector<ProjectRecord>& records() const noexcept {
    return records_;
  }
  const ProjectRecord* find(std::string_view name) const;

  bool operator==(const ProjectSet&) const = default;

private:
  std::vector<ProjectRecord> records_;
};

// Manifest: CSV with header `name,repo,language,fork_date`, '#' comment
// lines, double-quoted fields allowed. An empty fork_date means ABSENT.
// Rows without a repo are skipped with a warning. Relative repo paths are
// kept verbatim; see resolve_repo_path.
ProjectSet parse_manifest(std::string_view content,
                          Timestamp scan_time = now_utc());
ProjectSet load_manifest(const std::filesystem::path& path,
                         Timestamp scan_time = now_utc());
std::string serialize_manifest(const ProjectSet& projects);

// Resolves a manifest repo entry against the manifest's directory. URLs are
// returned unchanged.
std::string resolve_repo_path(const std::string& repo_location,
                              const std::filesystem::path& manifest_dir);

bool is_remote_location(std::string_view repo_location);

ProjectSet filter_by_language(const ProjectSet& projects,
                              std::string_view language);

// Manifest dates win; otherwise the earliest commit time of the repository.
ProjectRecord resolve_fork_date(const ProjectRecord& project,
                                const RepositoryHandle& history);

// { p | intro_min <= p.fork_date <= fix_max }. Throws
// Error(UnresolvedForkDate, name) for a project without a date.
ProjectSet filter_candidates(const ProjectSet& projects,
                             const VulnWindow& window);

} // namespace clonewatch
