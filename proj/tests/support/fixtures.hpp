#pragma once

#include "clonewatch/time.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace clonewatch::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& rel) const {
    return path_ / rel;
  }

private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& content);

// Writes each relative path -> content pair below root.
void write_tree(const std::filesystem::path& root,
                const std::map<std::string, std::string>& files);

std::string join_lines(const std::vector<std::string>& lines);

Timestamp ts(const char* rfc3339);

// A scripted Git repository with fully controlled commit dates.
class GitFixture {
public:
  explicit GitFixture(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  void write(const std::string& rel, const std::string& content) const;
  void write_lines(const std::string& rel,
                   const std::vector<std::string>& lines) const;
  void remove(const std::string& rel) const;

  // Stages everything and commits with author and committer date `when`
  // (committer date may differ when given). Returns the full hash.
  std::string commit(const std::string& message, Timestamp when);
  std::string commit(const std::string& message, Timestamp author,
                     Timestamp committer);

  std::string git(const std::vector<std::string>& args) const;

private:
  std::filesystem::path root_;
};

} // namespace clonewatch::testing
