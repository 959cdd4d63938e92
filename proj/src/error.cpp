#include "clonewatch/error.hpp"

namespace clonewatch {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::FileNotFound: return "FILE_NOT_FOUND";
  case ErrorCode::Io: return "IO";
  case ErrorCode::MalformedManifest: return "MALFORMED_MANIFEST";
  case ErrorCode::DuplicateProject: return "DUPLICATE_PROJECT";
  case ErrorCode::RepoUnreadable: return "REPO_UNREADABLE";
  case ErrorCode::EmptyHistory: return "EMPTY_HISTORY";
  case ErrorCode::UnresolvedForkDate: return "UNRESOLVED_FORK_DATE";
  case ErrorCode::SchemaViolation: return "SCHEMA_VIOLATION";
  case ErrorCode::BadCveId: return "BAD_CVE_ID";
  case ErrorCode::BadPattern: return "BAD_PATTERN";
  case ErrorCode::CommitNotFound: return "COMMIT_NOT_FOUND";
  case ErrorCode::EmptyCommitSet: return "EMPTY_COMMIT_SET";
  case ErrorCode::InvertedWindow: return "INVERTED_WINDOW";
  case ErrorCode::MalformedIssueExport: return "MALFORMED_ISSUE_EXPORT";
  case ErrorCode::EmptyAfterNormalization: return "EMPTY_AFTER_NORMALIZATION";
  case ErrorCode::EmptyTarget: return "EMPTY_TARGET";
  case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
  }
  return "UNKNOWN";
}

namespace {
std::string render(ErrorCode code, const std::string& detail) {
  std::string out(to_string(code));
  if (!detail.empty()) {
    out += '(';
    out += detail;
    out += ')';
  }
  return out;
}
} // namespace

Error::Error(ErrorCode code, std::string detail)
    : std::runtime_error(render(code, detail)), code_(code),
      detail_(std::move(detail)) {}

} // namespace clonewatch
