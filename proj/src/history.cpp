#include "clonewatch/history.hpp"

#include "clonewatch/error.hpp"
#include "clonewatch/process.hpp"
#include "clonewatch/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <regex>
#include <set>

namespace clonewatch {

using nlohmann::json;

bool is_commit_hash(std::string_view text) {
  return text.size() >= 7 && text.size() <= 64 &&
         std::all_of(text.begin(), text.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

bool insert_commit(CommitSet& set, CommitRef commit) {
  auto it = std::lower_bound(
      set.begin(), set.end(), commit.hash,
      [](const CommitRef& c, const std::string& h) { return c.hash < h; });
  if (it != set.end() && it->hash == commit.hash)
    return false;
  set.insert(it, std::move(commit));
  return true;
}

// ---------------------------------------------------------------------------
// RepositoryHandle

RepositoryHandle::RepositoryHandle(std::filesystem::path root,
                                   std::string default_branch)
    : root_(std::move(root)), branch_(std::move(default_branch)) {
  std::error_code ec;
  if (!std::filesystem::is_directory(root_, ec))
    throw Error(ErrorCode::RepoUnreadable, root_.string() + ": no such directory");
  git({"rev-parse", "--git-dir"});
}

std::string RepositoryHandle::git(const std::vector<std::string>& args) const {
  std::vector<std::string> argv{"git",
                                "-c", "core.quotepath=off",
                                "-c", "safe.directory=*",
                                "-c", "diff.noprefix=false",
                                "-C", root_.string()};
  argv.insert(argv.end(), args.begin(), args.end());
  ProcessResult r = run_process(argv, {}, {{"LC_ALL", "C"}, {"GIT_PAGER", "cat"}});
  if (!r.ok()) {
    std::string msg(text::trim(r.err));
    throw Error(ErrorCode::RepoUnreadable, root_.string() + ": git " +
                                               (args.empty() ? "" : args[0]) +
                                               ": " + msg);
  }
  return std::move(r.out);
}

namespace {

long long parse_integer(std::string_view s) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorCode::RepoUnreadable,
                "unexpected git output '" + std::string(s) + "'");
  return value;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(sep, start);
    if (end == std::string_view::npos)
      end = s.size();
    out.emplace_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::vector<std::string> split_nul_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto& item : split(s, '\0'))
    if (!item.empty())
      out.push_back(std::move(item));
  return out;
}

} // namespace

CommitRef RepositoryHandle::lookup_commit(std::string_view revision) const {
  std::string full;
  try {
    full = std::string(text::trim(
        git({"rev-parse", "--verify", "--quiet",
             std::string(revision) + "^{commit}"})));
  } catch (const Error&) {
    throw Error(ErrorCode::CommitNotFound, std::string(revision));
  }
  std::string meta =
      git({"show", "-s", "--format=%H%x00%at%x00%ct%x00%P%x00%B", full});
  auto parts = split(meta, '\0');
  if (parts.size() < 5)
    throw Error(ErrorCode::RepoUnreadable, "unexpected commit metadata");

  CommitRef commit;
  commit.hash = parts[0];
  commit.author_date = from_unix_seconds(parse_integer(parts[1]));
  commit.committer_date = from_unix_seconds(parse_integer(parts[2]));
  for (auto& p : split(parts[3], ' '))
    if (!p.empty())
      commit.parent_hashes.push_back(std::move(p));
  commit.message = std::string(text::trim(parts[4]));

  std::string files =
      commit.parent_hashes.empty()
          ? git({"diff-tree", "--root", "-r", "--no-commit-id", "--name-only",
                 "-z", commit.hash})
          : git({"diff", "--name-only", "-z", commit.parent_hashes.front(),
                 commit.hash});
  commit.touched_files = split_nul_list(files);
  return commit;
}

Timestamp RepositoryHandle::earliest_commit_time() const {
  try {
    git({"rev-parse", "--verify", "--quiet", branch_ + "^{commit}"});
  } catch (const Error&) {
    throw Error(ErrorCode::EmptyHistory, root_.string());
  }
  std::string out = git({"log", "--format=%ct", branch_});
  std::optional<long long> earliest;
  for (const auto& line : text::split_lines(out)) {
    auto t = text::trim(line);
    if (t.empty())
      continue;
    long long v = parse_integer(t);
    if (!earliest || v < *earliest)
      earliest = v;
  }
  if (!earliest)
    throw Error(ErrorCode::EmptyHistory, root_.string());
  return from_unix_seconds(*earliest);
}

// ---------------------------------------------------------------------------
// Fix matching

bool qualifies_for_szz(const IssueRecord& issue) {
  static const std::set<std::string> states{"fixed", "resolved", "closed",
                                            "bug"};
  return std::any_of(issue.state_labels.begin(), issue.state_labels.end(),
                     [](const std::string& l) { return states.contains(l); });
}

std::vector<MatchedFix> match_fix_commits(const std::vector<IssueRecord>& issues,
                                          const std::string& pattern) {
  std::regex re;
  try {
    re = std::regex(pattern, std::regex::ECMAScript | std::regex::icase);
  } catch (const std::regex_error& e) {
    throw Error(ErrorCode::BadPattern, pattern + ": " + e.what());
  }
  std::map<std::string, MatchedFix> found;
  for (const auto& issue : issues) {
    const bool issue_hit = std::regex_search(issue.title_and_body, re);
    for (const auto& commit : issue.linked_commits) {
      const bool message_hit = std::regex_search(commit.message, re);
      if (!issue_hit && !message_hit)
        continue;
      auto [it, inserted] = found.try_emplace(commit.hash);
      if (inserted)
        it->second.commit = commit;
      it->second.message_matched |= message_hit;
      it->second.issue_text_matched |= issue_hit;
    }
  }
  std::vector<MatchedFix> out;
  out.reserve(found.size());
  for (auto& [hash, m] : found)
    out.push_back(std::move(m));
  return out;
}

CommitSet commits_of(const std::vector<MatchedFix>& matches) {
  CommitSet set;
  for (const auto& m : matches)
    insert_commit(set, m.commit);
  return set;
}

// ---------------------------------------------------------------------------
// Blame

namespace {

// Undoes git's C-style quoting of unusual path names.
std::string unquote_path(std::string_view s) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"')
    return std::string(s);
  s = s.substr(1, s.size() - 2);
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 >= s.size()) {
      out += s[i];
      continue;
    }
    char c = s[++i];
    switch (c) {
    case 'n': out += '\n'; break;
    case 't': out += '\t'; break;
    case 'r': out += '\r'; break;
    case 'a': out += '\a'; break;
    case 'b': out += '\b'; break;
    case 'f': out += '\f'; break;
    case 'v': out += '\v'; break;
    default:
      if (c >= '0' && c <= '7') {
        int value = 0;
        std::size_t k = 0;
        for (; k < 3 && i + k < s.size() && s[i + k] >= '0' && s[i + k] <= '7';
             ++k)
          value = value * 8 + (s[i + k] - '0');
        out += static_cast<char>(value);
        i += k - 1;
      } else {
        out += c;
      }
    }
  }
  return out;
}

// Path from a "--- a/path" line, or empty for /dev/null.
std::string old_path_from(std::string_view line) {
  std::string_view rest = line.substr(4);
  if (!rest.empty() && rest.back() == '\t')
    rest.remove_suffix(1);
  if (rest == "/dev/null")
    return {};
  std::string path = unquote_path(rest);
  if (path.rfind("a/", 0) == 0)
    path.erase(0, 2);
  return path;
}

struct HunkHeader {
  std::size_t old_start = 0;
  std::size_t old_count = 1;
};

bool parse_hunk_header(std::string_view line, HunkHeader& h) {
  // @@ -start[,count] +start[,count] @@
  if (line.rfind("@@ -", 0) != 0)
    return false;
  std::size_t pos = 4;
  auto read_number = [&](std::size_t& out) {
    std::size_t start = pos;
    while (pos < line.size() && std::isdigit(static_cast<unsigned char>(line[pos])))
      ++pos;
    if (pos == start)
      return false;
    out = static_cast<std::size_t>(parse_integer(line.substr(start, pos - start)));
    return true;
  };
  if (!read_number(h.old_start))
    return false;
  h.old_count = 1;
  if (pos < line.size() && line[pos] == ',') {
    ++pos;
    if (!read_number(h.old_count))
      return false;
  }
  return true;
}

// Lines of the parent revision to blame, keyed by the parent-side path.
using BlameTargets = std::map<std::string, std::set<std::size_t>>;

BlameTargets collect_blame_targets(const RepositoryHandle& repo,
                                   const std::string& parent,
                                   const std::string& fix) {
  std::string diff = repo.git({"diff", "-U0", "--no-color", "--no-ext-diff",
                               "-M", "--src-prefix=a/", "--dst-prefix=b/",
                               parent, fix});
  BlameTargets targets;
  std::map<std::string, std::size_t> line_counts;
  auto old_line_count = [&](const std::string& path) {
    auto it = line_counts.find(path);
    if (it != line_counts.end())
      return it->second;
    std::size_t n =
        text::split_lines(repo.git({"cat-file", "-p", parent + ":" + path}))
            .size();
    line_counts.emplace(path, n);
    return n;
  };

  std::string old_path;
  bool in_file = false;
  for (const auto& line : text::split_lines(diff)) {
    if (line.rfind("diff --git ", 0) == 0) {
      in_file = true;
      old_path.clear();
      continue;
    }
    if (!in_file)
      continue;
    if (line.rfind("--- ", 0) == 0) {
      old_path = old_path_from(line);
      continue;
    }
    HunkHeader h;
    if (old_path.empty() || !parse_hunk_header(line, h))
      continue;
    auto& lines = targets[old_path];
    if (h.old_count > 0) {
      for (std::size_t l = h.old_start; l < h.old_start + h.old_count; ++l)
        lines.insert(l);
    } else {
      // Pure insertion after old line old_start.
      if (h.old_start >= 1)
        lines.insert(h.old_start);
      if (h.old_start + 1 <= old_line_count(old_path))
        lines.insert(h.old_start + 1);
    }
  }
  return targets;
}

bool is_blame_header(std::string_view line) {
  if (line.size() < 41 || line[40] != ' ')
    return false;
  return std::all_of(line.begin(), line.begin() + 40, [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
  });
}

} // namespace

CommitSet blame_previous_commits(const CommitRef& fix,
                                 const RepositoryHandle& repo) {
  const CommitRef resolved = repo.lookup_commit(fix.hash);
  CommitSet result;
  if (resolved.parent_hashes.empty())
    return result;
  const std::string& parent = resolved.parent_hashes.front();

  std::set<std::string> blamed;
  for (const auto& [path, lines] :
       collect_blame_targets(repo, parent, resolved.hash)) {
    if (lines.empty())
      continue;
    std::vector<std::string> args{"blame", "--porcelain"};
    auto it = lines.begin();
    while (it != lines.end()) {
      std::size_t start = *it, end = *it;
      for (++it; it != lines.end() && *it == end + 1; ++it)
        end = *it;
      args.push_back("-L");
      args.push_back(std::to_string(start) + "," + std::to_string(end));
    }
    args.push_back(parent);
    args.push_back("--");
    args.push_back(path);
    for (const auto& line : text::split_lines(repo.git(args)))
      if (is_blame_header(line))
        blamed.insert(line.substr(0, 40));
  }
  blamed.erase(resolved.hash);
  for (const auto& hash : blamed)
    insert_commit(result, repo.lookup_commit(hash));
  return result;
}

VulnWindow compute_window(const CommitSet& intro, const CommitSet& fix) {
  if (intro.empty())
    throw Error(ErrorCode::EmptyCommitSet, "intro");
  if (fix.empty())
    throw Error(ErrorCode::EmptyCommitSet, "fix");
  auto by_date = [](const CommitRef& a, const CommitRef& b) {
    return a.committer_date < b.committer_date;
  };
  VulnWindow window;
  window.intro_min =
      std::min_element(intro.begin(), intro.end(), by_date)->committer_date;
  window.fix_max =
      std::max_element(fix.begin(), fix.end(), by_date)->committer_date;
  if (window.intro_min > window.fix_max)
    throw Error(ErrorCode::InvertedWindow,
                format_timestamp(window.intro_min) + " > " +
                    format_timestamp(window.fix_max));
  window.intro_commits = intro;
  window.fix_commits = fix;
  return window;
}

// ---------------------------------------------------------------------------
// Issue export

std::vector<IssueRecord> parse_issues(std::string_view document) {
  if (text::trim(document).empty())
    return {};
  json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded())
    throw Error(ErrorCode::MalformedIssueExport, "not valid JSON");
  if (doc.is_object() && doc.contains("issues"))
    doc = doc["issues"];
  if (!doc.is_array())
    throw Error(ErrorCode::MalformedIssueExport, "expected an array of issues");

  std::vector<IssueRecord> issues;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& item = doc[i];
    const std::string where = "issue[" + std::to_string(i) + "]";
    if (!item.is_object())
      throw Error(ErrorCode::MalformedIssueExport, where + ": not an object");
    IssueRecord issue;
    auto id = item.find("issue_id");
    if (id == item.end() || !(id->is_string() || id->is_number_integer()))
      throw Error(ErrorCode::MalformedIssueExport, where + ": missing issue_id");
    issue.issue_id =
        id->is_string() ? id->get<std::string>() : std::to_string(id->get<long long>());
    if (issue.issue_id.empty())
      throw Error(ErrorCode::MalformedIssueExport, where + ": empty issue_id");

    if (auto labels = item.find("labels"); labels != item.end()) {
      if (!labels->is_array())
        throw Error(ErrorCode::MalformedIssueExport, where + ": labels");
      for (const auto& l : *labels) {
        if (!l.is_string())
          throw Error(ErrorCode::MalformedIssueExport, where + ": labels");
        issue.state_labels.insert(text::to_lower(l.get<std::string>()));
      }
    }
    if (auto commits = item.find("commits"); commits != item.end()) {
      if (!commits->is_array())
        throw Error(ErrorCode::MalformedIssueExport, where + ": commits");
      for (const auto& c : *commits) {
        CommitRef ref;
        if (c.is_string()) {
          ref.hash = c.get<std::string>();
        } else if (c.is_object() && c.contains("hash") && c["hash"].is_string()) {
          ref.hash = c["hash"].get<std::string>();
          if (c.contains("message") && c["message"].is_string())
            ref.message = c["message"].get<std::string>();
        } else {
          throw Error(ErrorCode::MalformedIssueExport, where + ": commits");
        }
        ref.hash = text::to_lower(ref.hash);
        if (!is_commit_hash(ref.hash))
          throw Error(ErrorCode::MalformedIssueExport,
                      where + ": bad commit hash '" + ref.hash + "'");
        issue.linked_commits.push_back(std::move(ref));
      }
    }
    if (auto body = item.find("text"); body != item.end() && !body->is_null()) {
      if (!body->is_string())
        throw Error(ErrorCode::MalformedIssueExport, where + ": text");
      issue.title_and_body = body->get<std::string>();
    }
    issues.push_back(std::move(issue));
  }
  return issues;
}

std::vector<IssueRecord> read_issues(const std::filesystem::path& source) {
  return parse_issues(text::read_file(source));
}

void resolve_issue_commits(std::vector<IssueRecord>& issues,
                           const RepositoryHandle& repo) {
  for (auto& issue : issues) {
    for (auto& commit : issue.linked_commits) {
      CommitRef full = repo.lookup_commit(commit.hash);
      if (full.message.empty())
        full.message = commit.message;
      commit = std::move(full);
    }
  }
}

// ---------------------------------------------------------------------------
// Window persistence

namespace {

json commit_to_json(const CommitRef& c) {
  return json{{"hash", c.hash},
              {"author_date", format_timestamp(c.author_date)},
              {"committer_date", format_timestamp(c.committer_date)},
              {"parents", c.parent_hashes},
              {"files", c.touched_files},
              {"message", c.message}};
}

Timestamp timestamp_field(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_string())
    throw Error(ErrorCode::SchemaViolation, field);
  auto t = parse_timestamp(j[field].get<std::string>());
  if (!t)
    throw Error(ErrorCode::SchemaViolation, field);
  return *t;
}

CommitRef commit_from_json(const json& j) {
  if (!j.is_object() || !j.contains("hash") || !j["hash"].is_string())
    throw Error(ErrorCode::SchemaViolation, "commit.hash");
  CommitRef c;
  c.hash = j["hash"].get<std::string>();
  if (!is_commit_hash(c.hash))
    throw Error(ErrorCode::SchemaViolation, "commit.hash");
  c.author_date = timestamp_field(j, "author_date");
  c.committer_date = timestamp_field(j, "committer_date");
  c.parent_hashes = j.value("parents", std::vector<std::string>{});
  c.touched_files = j.value("files", std::vector<std::string>{});
  c.message = j.value("message", std::string{});
  return c;
}

CommitSet commits_from_json(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_array())
    throw Error(ErrorCode::SchemaViolation, field);
  CommitSet set;
  for (const auto& item : j[field])
    insert_commit(set, commit_from_json(item));
  return set;
}

} // namespace

std::string serialize_window(const VulnWindow& window) {
  json intro = json::array(), fix = json::array();
  for (const auto& c : window.intro_commits)
    intro.push_back(commit_to_json(c));
  for (const auto& c : window.fix_commits)
    fix.push_back(commit_to_json(c));
  json doc{{"intro_min", format_timestamp(window.intro_min)},
           {"fix_max", format_timestamp(window.fix_max)},
           {"intro_commits", intro},
           {"fix_commits", fix}};
  return doc.dump(2) + "\n";
}

VulnWindow deserialize_window(std::string_view document) {
  json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw Error(ErrorCode::SchemaViolation, "window document");
  VulnWindow w;
  w.intro_min = timestamp_field(doc, "intro_min");
  w.fix_max = timestamp_field(doc, "fix_max");
  w.intro_commits = commits_from_json(doc, "intro_commits");
  w.fix_commits = commits_from_json(doc, "fix_commits");
  if (w.intro_min > w.fix_max)
    throw Error(ErrorCode::InvertedWindow, "stored window");
  return w;
}

void save_window(const VulnWindow& window, const std::filesystem::path& path) {
  text::write_file(path, serialize_window(window));
}

VulnWindow load_window(const std::filesystem::path& path) {
  return deserialize_window(text::read_file(path));
}

} // namespace clonewatch
