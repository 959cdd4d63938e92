#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace clonewatch {

enum class ErrorCode {
  FileNotFound,
  Io,
  MalformedManifest,
  DuplicateProject,
  RepoUnreadable,
  EmptyHistory,
  UnresolvedForkDate,
  SchemaViolation,
  BadCveId,
  BadPattern,
  CommitNotFound,
  EmptyCommitSet,
  InvertedWindow,
  MalformedIssueExport,
  EmptyAfterNormalization,
  EmptyTarget,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library. what() renders as CODE(detail).
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, std::string detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

private:
  ErrorCode code_;
  std::string detail_;
};

} // namespace clonewatch
