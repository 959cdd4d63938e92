#pragma once

#include "clonewatch/time.hpp"

#include <string>
#include <vector>

namespace clonewatch {

struct CommitRef {
  std::string hash; // lowercase hex
  Timestamp author_date{};
  Timestamp committer_date{};
  std::vector<std::string> touched_files;
  std::vector<std::string> parent_hashes;
  std::string message;

  bool operator==(const CommitRef&) const = default;
};

// lowercase hex, at least 7 characters
bool is_commit_hash(std::string_view text);

// Sorted by hash, no two entries share a hash.
using CommitSet = std::vector<CommitRef>;

// Inserts unless a commit with the same hash is present; returns whether it
// was inserted.
bool insert_commit(CommitSet& set, CommitRef commit);

// [oldest introducing commit, newest fixing commit] by committer date.
struct VulnWindow {
  Timestamp intro_min{};
  Timestamp fix_max{};
  CommitSet intro_commits;
  CommitSet fix_commits;

  bool contains(Timestamp t) const noexcept {
    return intro_min <= t && t <= fix_max;
  }
};

} // namespace clonewatch
