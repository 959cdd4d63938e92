#include "clonewatch/clonedetect.hpp"

#include "clonewatch/error.hpp"
#include "clonewatch/log.hpp"
#include "clonewatch/testgen.hpp"
#include "clonewatch/text.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <limits>
#include <optional>
#include <unordered_map>

#include <fnmatch.h>

namespace clonewatch {

void NormalizationProfile::validate() const {
  for (const auto& m : line_comment_markers)
    if (m.empty())
      throw Error(ErrorCode::InvalidArgument, "empty line comment marker");
  for (const auto& [open, close] : block_comment_delims)
    if (open.empty() || close.empty())
      throw Error(ErrorCode::InvalidArgument, "empty block comment delimiter");
}

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

std::string finish_line(std::string_view raw, bool collapse) {
  std::string_view t = text::trim(raw);
  if (!collapse)
    return std::string(t);
  std::string out;
  out.reserve(t.size());
  bool pending_space = false;
  for (char c : t) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space)
      out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

bool starts_with_at(std::string_view s, std::size_t pos, std::string_view p) {
  return s.size() - pos >= p.size() && s.compare(pos, p.size(), p) == 0;
}

} // namespace

NormalizedFile normalize_source(std::span<const std::string> raw,
                                const NormalizationProfile& profile,
                                std::string path) {
  profile.validate();
  NormalizedFile out;
  out.path = std::move(path);
  const std::string where = out.path.empty() ? "<input>" : out.path;

  // Index into block_comment_delims of the open block comment, if any.
  std::optional<std::size_t> open_block;
  std::size_t block_started = 0;
  std::size_t invalid_lines = 0;

  for (std::size_t n = 0; n < raw.size(); ++n) {
    std::string line = raw[n];
    if (!text::sanitize_utf8(line))
      ++invalid_lines;

    std::string code;
    code.reserve(line.size());
    char quote = 0;
    std::size_t pos = 0;
    while (pos < line.size()) {
      if (open_block) {
        const auto& close = profile.block_comment_delims[*open_block].second;
        auto end = line.find(close, pos);
        if (end == std::string::npos) {
          pos = line.size();
        } else {
          pos = end + close.size();
          open_block.reset();
          code += ' ';
        }
        continue;
      }
      const char c = line[pos];
      if (quote) {
        code += c;
        if (c == '\\' && pos + 1 < line.size()) {
          code += line[pos + 1];
          pos += 2;
          continue;
        }
        if (c == quote)
          quote = 0;
        ++pos;
        continue;
      }

      // Longest comment opener at this position wins.
      std::size_t best_len = 0;
      bool best_is_block = false;
      std::size_t best_block = 0;
      for (const auto& m : profile.line_comment_markers)
        if (m.size() > best_len && starts_with_at(line, pos, m))
          best_len = m.size();
      for (std::size_t b = 0; b < profile.block_comment_delims.size(); ++b) {
        const auto& open = profile.block_comment_delims[b].first;
        if (open.size() > best_len && starts_with_at(line, pos, open)) {
          best_len = open.size();
          best_is_block = true;
          best_block = b;
        }
      }
      if (best_len > 0) {
        if (!best_is_block)
          break;
        open_block = best_block;
        block_started = n + 1;
        pos += best_len;
        continue;
      }

      if (profile.quote_chars.find(c) != std::string::npos &&
          !(pos > 0 && std::isalnum(static_cast<unsigned char>(line[pos - 1])) &&
            c == '\''))
        quote = c;
      code += c;
      ++pos;
    }

    std::string normalized =
        finish_line(code, profile.collapse_internal_whitespace);
    if (normalized.empty() && profile.drop_blank_lines)
      continue;
    out.lines.push_back(std::move(normalized));
    out.line_map.push_back(n + 1);
  }

  if (invalid_lines > 0)
    out.warnings.push_back(where + ": invalid UTF-8 replaced on " +
                           std::to_string(invalid_lines) + " line(s)");
  if (open_block)
    out.warnings.push_back(where + ": unterminated block comment from line " +
                           std::to_string(block_started) +
                           " treated as comment to end of file");
  return out;
}

// ---------------------------------------------------------------------------
// Exact block matching

namespace {

// Maps each distinct line to a dense id so comparisons become integer ones.
class LineInterner {
public:
  std::uint32_t intern(const std::string& line) {
    auto [it, inserted] =
        ids_.try_emplace(line, static_cast<std::uint32_t>(ids_.size()));
    return it->second;
  }
  std::optional<std::uint32_t> lookup(const std::string& line) const {
    auto it = ids_.find(line);
    if (it == ids_.end())
      return std::nullopt;
    return it->second;
  }

private:
  std::unordered_map<std::string, std::uint32_t> ids_;
};

} // namespace

std::vector<CloneMatch> find_clones(std::span<const std::string> needle,
                                    const NormalizedFile& haystack,
                                    std::size_t threshold,
                                    std::size_t snippet_index) {
  if (needle.empty())
    throw Error(ErrorCode::InvalidArgument, "empty needle");
  if (threshold != needle.size())
    throw Error(ErrorCode::InvalidArgument,
                "threshold " + std::to_string(threshold) +
                    " differs from needle length " +
                    std::to_string(needle.size()));
  std::vector<CloneMatch> matches;
  const std::size_t m = needle.size();
  if (haystack.lines.size() < m)
    return matches;

  LineInterner interner;
  std::vector<std::uint32_t> pattern(m);
  for (std::size_t i = 0; i < m; ++i)
    pattern[i] = interner.intern(needle[i]);

  // Knuth-Morris-Pratt failure function over line ids.
  std::vector<std::size_t> fail(m, 0);
  for (std::size_t i = 1, k = 0; i < m; ++i) {
    while (k > 0 && pattern[i] != pattern[k])
      k = fail[k - 1];
    if (pattern[i] == pattern[k])
      ++k;
    fail[i] = k;
  }

  constexpr std::uint32_t kAbsent = std::numeric_limits<std::uint32_t>::max();
  std::size_t k = 0;
  for (std::size_t i = 0; i < haystack.lines.size(); ++i) {
    const std::uint32_t id =
        interner.lookup(haystack.lines[i]).value_or(kAbsent);
    while (k > 0 && id != pattern[k])
      k = fail[k - 1];
    if (id == pattern[k])
      ++k;
    if (k == m) {
      const std::size_t start = i + 1 - m;
      matches.push_back(CloneMatch{haystack.path, haystack.line_map[start],
                                   haystack.line_map[i], m, snippet_index});
      k = fail[k - 1];
    }
  }
  return matches;
}

std::string_view to_string(VerdictStatus status) {
  switch (status) {
  case VerdictStatus::Vulnerable: return "VULNERABLE";
  case VerdictStatus::Fixed: return "FIXED";
  case VerdictStatus::NotAffected: return "NOT_AFFECTED";
  case VerdictStatus::FilteredOut: return "FILTERED_OUT";
  case VerdictStatus::Error: return "ERROR";
  }
  return "ERROR";
}

VerdictStatus verdict_status_from_string(std::string_view name) {
  for (auto s : {VerdictStatus::Vulnerable, VerdictStatus::Fixed,
                 VerdictStatus::NotAffected, VerdictStatus::FilteredOut,
                 VerdictStatus::Error})
    if (to_string(s) == name)
      return s;
  throw Error(ErrorCode::SchemaViolation,
              "unknown status '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// File selection

bool FileSelection::selects(std::string_view relative_path) const {
  const std::string path(relative_path);
  auto matches = [&](const std::string& glob) {
    if (::fnmatch(glob.c_str(), path.c_str(), 0) == 0)
      return true;
    // Bare globs such as "*.cpp" also match on the file name alone.
    auto slash = path.rfind('/');
    return glob.find('/') == std::string::npos && slash != std::string::npos &&
           ::fnmatch(glob.c_str(), path.c_str() + slash + 1, 0) == 0;
  };
  for (const auto& g : exclude)
    if (matches(g))
      return false;
  return std::any_of(include.begin(), include.end(), matches);
}

std::vector<std::string> default_globs(std::string_view language) {
  const std::string lang = text::to_lower(language);
  if (lang == "c++" || lang == "cpp")
    return {"*.cpp", "*.h", "*.hpp", "*.cc", "*.cxx"};
  if (lang == "c")
    return {"*.c", "*.h"};
  if (lang == "go")
    return {"*.go"};
  if (lang == "rust")
    return {"*.rs"};
  if (lang == "java")
    return {"*.java"};
  if (lang == "python")
    return {"*.py"};
  if (lang == "javascript")
    return {"*.js", "*.mjs", "*.cjs"};
  if (lang == "typescript")
    return {"*.ts", "*.tsx"};
  return {"*"};
}

std::vector<std::string> list_source_files(const std::filesystem::path& root,
                                           const FileSelection& selection) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec))
    throw Error(ErrorCode::FileNotFound, root.string());
  std::vector<std::string> files;
  fs::recursive_directory_iterator it(
      root, fs::directory_options::skip_permission_denied, ec);
  if (ec)
    throw Error(ErrorCode::Io, root.string() + ": " + ec.message());
  for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec)
      break;
    const auto& entry = *it;
    const auto name = entry.path().filename().string();
    if (entry.is_directory(ec)) {
      if (name == ".git" || name == ".hg" || name == ".svn")
        it.disable_recursion_pending();
      continue;
    }
    if (!entry.is_regular_file(ec))
      continue;
    std::string rel = entry.path().lexically_relative(root).generic_string();
    if (selection.selects(rel))
      files.push_back(std::move(rel));
  }
  if (ec)
    throw Error(ErrorCode::Io, root.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  return files;
}

bool load_normalized(const std::filesystem::path& root,
                     const std::string& relative_path,
                     const NormalizationProfile& profile, NormalizedFile& out,
                     std::vector<std::string>& warnings) {
  std::ifstream in(root / relative_path, std::ios::binary);
  if (!in) {
    warnings.push_back(relative_path + ": unreadable, skipped");
    return false;
  }
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  if (in.bad()) {
    warnings.push_back(relative_path + ": read error, skipped");
    return false;
  }
  const std::size_t probe = std::min<std::size_t>(content.size(), 8192);
  if (content.find('\0') < probe) {
    warnings.push_back(relative_path + ": binary, skipped");
    return false;
  }
  auto lines = text::split_lines(content);
  out = normalize_source(lines, profile, relative_path);
  for (auto& w : out.warnings)
    warnings.push_back(w);
  return true;
}

ProjectVerdict scan_project(const DetectionTest& test,
                            const std::string& project_name,
                            const std::filesystem::path& project_root,
                            const NormalizationProfile& profile,
                            const FileSelection& selection) {
  const auto started = std::chrono::steady_clock::now();
  ProjectVerdict verdict;
  verdict.project = project_name;

  std::vector<std::string> files;
  try {
    files = list_source_files(project_root, selection);
  } catch (const Error& e) {
    verdict.status = VerdictStatus::Error;
    verdict.diagnostic = e.what();
    verdict.elapsed = std::chrono::steady_clock::now() - started;
    return verdict;
  }

  for (const auto& rel : files) {
    NormalizedFile file;
    if (!load_normalized(project_root, rel, profile, file, verdict.warnings))
      continue;
    for (std::size_t i = 0; i < test.vulnerable_snippets.size(); ++i) {
      const auto& s = test.vulnerable_snippets[i];
      auto found = find_clones(s.normalized, file, s.threshold, i);
      verdict.vuln_matches.insert(verdict.vuln_matches.end(), found.begin(),
                                  found.end());
    }
    for (std::size_t i = 0; i < test.fix_snippets.size(); ++i) {
      const auto& s = test.fix_snippets[i];
      auto found = find_clones(s.normalized, file, s.threshold, i);
      verdict.fix_matches.insert(verdict.fix_matches.end(), found.begin(),
                                 found.end());
    }
  }

  if (!verdict.fix_matches.empty())
    verdict.status = VerdictStatus::Fixed;
  else if (!verdict.vuln_matches.empty())
    verdict.status = VerdictStatus::Vulnerable;
  else
    verdict.status = VerdictStatus::NotAffected;
  verdict.elapsed = std::chrono::steady_clock::now() - started;
  return verdict;
}

// ---------------------------------------------------------------------------
// Clone ratio

namespace {

constexpr std::uint64_t kHashBase = 0x100000001b3ULL;

struct Location {
  std::size_t file;
  std::size_t pos;
};

using IdSequence = std::vector<std::uint32_t>;

std::uint64_t sequence_hash(const IdSequence& s) {
  std::uint64_t h = 0;
  for (auto id : s)
    h = h * kHashBase + id + 1;
  return h;
}

} // namespace

CloneRatioResult clone_ratio(std::span<const NormalizedFile> target,
                             std::span<const NormalizedFile> reference,
                             std::size_t min_block) {
  if (min_block < 2)
    throw Error(ErrorCode::InvalidArgument,
                "min_block must be at least 2, got " + std::to_string(min_block));

  LineInterner interner;
  auto to_ids = [&](const NormalizedFile& f) {
    IdSequence ids(f.lines.size());
    for (std::size_t i = 0; i < ids.size(); ++i)
      ids[i] = interner.intern(f.lines[i]);
    return ids;
  };
  std::vector<IdSequence> ref_ids;
  ref_ids.reserve(reference.size());
  for (const auto& f : reference)
    ref_ids.push_back(to_ids(f));

  // Rabin-Karp over line ids: power = base^(min_block-1).
  std::uint64_t power = 1;
  for (std::size_t i = 1; i < min_block; ++i)
    power *= kHashBase;
  auto for_each_window = [&](const IdSequence& ids, auto&& visit) {
    if (ids.size() < min_block)
      return;
    std::uint64_t h = 0;
    for (std::size_t i = 0; i < min_block; ++i)
      h = h * kHashBase + ids[i] + 1;
    visit(std::size_t{0}, h);
    for (std::size_t i = min_block; i < ids.size(); ++i) {
      h = (h - (ids[i - min_block] + 1ULL) * power) * kHashBase + ids[i] + 1;
      visit(i + 1 - min_block, h);
    }
  };

  std::unordered_multimap<std::uint64_t, Location> windows;
  std::unordered_multimap<std::uint64_t, std::size_t> whole_files;
  for (std::size_t f = 0; f < ref_ids.size(); ++f) {
    for_each_window(ref_ids[f], [&](std::size_t pos, std::uint64_t h) {
      windows.emplace(h, Location{f, pos});
    });
    if (!ref_ids[f].empty())
      whole_files.emplace(sequence_hash(ref_ids[f]), f);
  }

  CloneRatioResult result;
  result.min_block = min_block;
  for (const auto& file : target) {
    const IdSequence ids = to_ids(file);
    result.total_lines += ids.size();
    if (ids.empty())
      continue;

    auto [wf_begin, wf_end] = whole_files.equal_range(sequence_hash(ids));
    bool whole = std::any_of(wf_begin, wf_end, [&](const auto& entry) {
      return ref_ids[entry.second] == ids;
    });
    if (whole) {
      result.cloned_lines += ids.size();
      continue;
    }

    std::vector<bool> covered(ids.size(), false);
    for_each_window(ids, [&](std::size_t pos, std::uint64_t h) {
      auto [begin, end] = windows.equal_range(h);
      for (auto it = begin; it != end; ++it) {
        const auto& loc = it->second;
        if (std::equal(ids.begin() + static_cast<std::ptrdiff_t>(pos),
                       ids.begin() + static_cast<std::ptrdiff_t>(pos + min_block),
                       ref_ids[loc.file].begin() +
                           static_cast<std::ptrdiff_t>(loc.pos))) {
          std::fill(covered.begin() + static_cast<std::ptrdiff_t>(pos),
                    covered.begin() + static_cast<std::ptrdiff_t>(pos + min_block),
                    true);
          break;
        }
      }
    });
    result.cloned_lines +=
        static_cast<std::size_t>(std::count(covered.begin(), covered.end(), true));
  }
  if (result.total_lines == 0)
    throw Error(ErrorCode::EmptyTarget, "target has no normalized lines");
  return result;
}

CloneRatioResult clone_ratio(const std::filesystem::path& target_root,
                             const std::filesystem::path& reference_root,
                             const NormalizationProfile& profile,
                             std::size_t min_block,
                             const FileSelection& selection) {
  auto load_tree = [&](const std::filesystem::path& root) {
    std::vector<NormalizedFile> files;
    std::vector<std::string> warnings;
    for (const auto& rel : list_source_files(root, selection)) {
      NormalizedFile f;
      if (load_normalized(root, rel, profile, f, warnings))
        files.push_back(std::move(f));
    }
    for (const auto& w : warnings)
      log::warn(w);
    return files;
  };
  auto target = load_tree(target_root);
  auto reference = load_tree(reference_root);
  CloneRatioResult result = clone_ratio(target, reference, min_block);
  result.target = target_root.string();
  result.reference = reference_root.string();
  return result;
}

} // namespace clonewatch
