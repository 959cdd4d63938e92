#pragma once

#include "clonewatch/commit.hpp"
#include "clonewatch/cve.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace clonewatch {

// Read-only view of a local Git repository, backed by the git client. All
// queries are independent subprocess calls, so one handle may be shared
// between threads.
class RepositoryHandle {
public:
  // Throws Error(RepoUnreadable) when root holds no readable repository.
  explicit RepositoryHandle(std::filesystem::path root,
                            std::string default_branch = "HEAD");

  const std::filesystem::path& root_path() const noexcept { return root_; }
  const std::string& default_branch() const noexcept { return branch_; }

  // Throws Error(CommitNotFound) for an unknown revision.
  CommitRef lookup_commit(std::string_view revision) const;

  // Committer time of the earliest commit reachable from the default
  // branch. Throws Error(EmptyHistory) when there are no commits.
  Timestamp earliest_commit_time() const;

  // Runs `git <args>` in the repository; throws Error(RepoUnreadable) with
  // git's stderr on a nonzero exit.
  std::string git(const std::vector<std::string>& args) const;

private:
  std::filesystem::path root_;
  std::string branch_;
};

// The issue states whose commits take part in fix matching.
bool qualifies_for_szz(const IssueRecord& issue);

struct MatchedFix {
  CommitRef commit;
  bool message_matched = false;
  bool issue_text_matched = false;
};

// Linked commits of the given issues whose message, or whose issue's text,
// matches pattern (case-insensitive ECMAScript). One entry per hash, sorted
// by hash; the match flags are OR-ed across issues. Throws
// Error(BadPattern) when the pattern does not compile.
std::vector<MatchedFix> match_fix_commits(const std::vector<IssueRecord>& issues,
                                          const std::string& pattern);

CommitSet commits_of(const std::vector<MatchedFix>& matches);

// Commits that last touched each line the fix deleted or modified, blamed at
// the fix's first parent. An insertion into an existing file implicates the
// lines directly above and below it. Never includes the fix itself.
CommitSet blame_previous_commits(const CommitRef& fix,
                                 const RepositoryHandle& repo);

// Throws Error(EmptyCommitSet, "intro"/"fix") and Error(InvertedWindow).
VulnWindow compute_window(const CommitSet& intro, const CommitSet& fix);

// Issue export: a JSON array (or {"issues": [...]}) of objects with
// issue_id, labels[], commits[] (hash strings or {hash, message}) and text.
std::vector<IssueRecord> parse_issues(std::string_view document);
std::vector<IssueRecord> read_issues(const std::filesystem::path& source);

// Replaces each linked commit with the repository's full record, keeping a
// message supplied by the export when git has none to offer.
void resolve_issue_commits(std::vector<IssueRecord>& issues,
                           const RepositoryHandle& repo);

std::string serialize_window(const VulnWindow& window);
VulnWindow deserialize_window(std::string_view document);
void save_window(const VulnWindow& window, const std::filesystem::path& path);
VulnWindow load_window(const std::filesystem::path& path);

} // namespace clonewatch
