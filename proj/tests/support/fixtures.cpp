#include "fixtures.hpp"

#include "clonewatch/error.hpp"
#include "clonewatch/process.hpp"
#include "clonewatch/text.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace clonewatch::testing {

TempDir::TempDir() {
  auto pattern =
      (std::filesystem::temp_directory_path() / "clonewatch-test-XXXXXX").string();
  if (!::mkdtemp(pattern.data()))
    throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

void write_tree(const std::filesystem::path& root,
                const std::map<std::string, std::string>& files) {
  for (const auto& [rel, content] : files)
    write_text(root / rel, content);
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines)
    out += l + "\n";
  return out;
}

Timestamp ts(const char* rfc3339) {
  auto t = parse_timestamp(rfc3339);
  if (!t)
    throw std::invalid_argument(rfc3339);
  return *t;
}

GitFixture::GitFixture(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
  git({"init", "-q"});
}

std::string GitFixture::git(const std::vector<std::string>& args) const {
  std::vector<std::string> argv{"git",
                                "-c", "user.name=Fixture",
                                "-c", "user.email=fixture@example.org",
                                "-c", "commit.gpgsign=false",
                                "-c", "init.defaultBranch=main",
                                "-c", "core.autocrlf=false",
                                "-C", root_.string()};
  argv.insert(argv.end(), args.begin(), args.end());
  auto r = run_process(argv);
  if (!r.ok())
    throw std::runtime_error("git failed: " + r.err);
  return r.out;
}

void GitFixture::write(const std::string& rel, const std::string& content) const {
  write_text(root_ / rel, content);
}

void GitFixture::write_lines(const std::string& rel,
                             const std::vector<std::string>& lines) const {
  write(rel, join_lines(lines));
}

void GitFixture::remove(const std::string& rel) const {
  std::filesystem::remove(root_ / rel);
}

std::string GitFixture::commit(const std::string& message, Timestamp when) {
  return commit(message, when, when);
}

std::string GitFixture::commit(const std::string& message, Timestamp author,
                               Timestamp committer) {
  auto unix = [](Timestamp t) {
    return "@" + std::to_string(t.time_since_epoch().count()) + " +0000";
  };
  git({"add", "-A"});
  std::vector<std::string> argv{"git",
                                "-c", "user.name=Fixture",
                                "-c", "user.email=fixture@example.org",
                                "-c", "commit.gpgsign=false",
                                "-C", root_.string(),
                                "commit", "-q", "--allow-empty", "-m", message};
  auto r = run_process(argv, {},
                       {{"GIT_AUTHOR_DATE", unix(author)},
                        {"GIT_COMMITTER_DATE", unix(committer)}});
  if (!r.ok())
    throw std::runtime_error("git commit failed: " + r.err);
  return std::string(text::trim(git({"rev-parse", "HEAD"})));
}

} // namespace clonewatch::testing
