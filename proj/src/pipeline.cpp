#include "clonewatch/pipeline.hpp"

#include "clonewatch/cve.hpp"
#include "clonewatch/log.hpp"
#include "clonewatch/text.hpp"
#include "profile_json.hpp"

#include <json.hpp>

#include <atomic>
#include <thread>

namespace clonewatch {

using nlohmann::json;

std::string_view tool_version() { return CLONEWATCH_VERSION; }

std::filesystem::path default_data_dir() {
  return std::filesystem::path(CLONEWATCH_DATA_DIR);
}

std::filesystem::path ScanConfig::effective_stopwords() const {
  return stopwords_path.empty() ? default_data_dir() / "stopwords.txt"
                                : stopwords_path;
}

std::filesystem::path ScanConfig::effective_window() const {
  return window_path ? *window_path : output_dir / "window.json";
}

std::filesystem::path ScanConfig::effective_test() const {
  return detection_test_path ? *detection_test_path
                             : output_dir / "detection_test.json";
}

void ScanConfig::validate() const {
  if (parallelism == 0)
    throw Error(ErrorCode::InvalidArgument, "jobs must be at least 1");
  if (min_block < 2)
    throw Error(ErrorCode::InvalidArgument, "min-block must be at least 2");
  profile.validate();
}

ScanConfig load_config(const std::filesystem::path& path, ScanConfig base) {
  json doc = json::parse(text::read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw Error(ErrorCode::SchemaViolation, path.string() + ": not a JSON object");
  const auto dir = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_relative() && !dir.empty() ? dir / fp : fp;
  };
  try {
    auto path_field = [&](const char* key, std::filesystem::path& into) {
      if (doc.contains(key))
        into = resolve(doc[key].get<std::string>());
    };
    auto optional_path = [&](const char* key,
                             std::optional<std::filesystem::path>& into) {
      if (doc.contains(key))
        into = resolve(doc[key].get<std::string>());
    };
    path_field("cve", base.cve_descriptor_path);
    path_field("manifest", base.manifest_path);
    path_field("issues", base.issue_export_path);
    path_field("repo", base.parent_repo_path);
    path_field("annotations", base.annotations_path);
    path_field("stopwords", base.stopwords_path);
    path_field("out", base.output_dir);
    optional_path("test", base.detection_test_path);
    optional_path("window", base.window_path);
    if (doc.contains("branch"))
      base.parent_branch = doc["branch"].get<std::string>();
    if (doc.contains("jobs"))
      base.parallelism = doc["jobs"].get<std::size_t>();
    if (doc.contains("language"))
      base.language_filter = doc["language"].get<std::string>();
    if (doc.contains("min_block"))
      base.min_block = doc["min_block"].get<std::size_t>();
    if (doc.contains("keywords"))
      base.query_keywords = doc["keywords"].get<std::size_t>();
    if (doc.contains("globs"))
      base.file_globs = doc["globs"].get<std::vector<std::string>>();
    if (doc.contains("exclude"))
      base.exclude_globs = doc["exclude"].get<std::vector<std::string>>();
    if (doc.contains("profile"))
      base.profile = detail::profile_from_json(doc["profile"], base.profile);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, path.string() + ": " + e.what());
  }
  return base;
}

StageError::StageError(std::string stage, const Error& cause)
    : Error(cause.code(), cause.detail()), stage_(std::move(stage)) {}

namespace {

template <typename F>
auto in_stage(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

FileSelection selection_for(const ScanConfig& config, std::string_view language) {
  FileSelection s;
  s.include = config.file_globs.empty() ? default_globs(language)
                                        : config.file_globs;
  s.exclude = config.exclude_globs;
  return s;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& i : items)
    out += (out.empty() ? "" : ",") + i;
  return out;
}

} // namespace

// ---------------------------------------------------------------------------

SzzResult run_szz(const ScanConfig& config) {
  config.validate();
  const auto stopwords = in_stage("cve", [&] {
    return load_stopwords(config.effective_stopwords());
  });
  const CveDescriptor cve = in_stage("cve", [&] {
    return load_cve(config.cve_descriptor_path, stopwords);
  });
  auto issues = in_stage("issues", [&] {
    return read_issues(config.issue_export_path);
  });

  return in_stage("szz", [&] {
    RepositoryHandle repo(config.parent_repo_path, config.parent_branch);
    std::vector<IssueRecord> qualifying;
    for (auto& issue : issues)
      if (qualifies_for_szz(issue))
        qualifying.push_back(std::move(issue));
    resolve_issue_commits(qualifying, repo);

    SzzResult result;
    result.pattern = build_issue_query(cve, config.query_keywords);
    result.fixes = match_fix_commits(qualifying, result.pattern);
    const CommitSet fixes = commits_of(result.fixes);
    CommitSet intro;
    for (const auto& fix : fixes)
      for (auto& c : blame_previous_commits(fix, repo))
        insert_commit(intro, std::move(c));
    result.window = compute_window(intro, fixes);
    result.window_file = config.effective_window();
    save_window(result.window, result.window_file);
    return result;
  });
}

std::string_view to_string(FilterDecision decision) {
  switch (decision) {
  case FilterDecision::Included: return "INCLUDED";
  case FilterDecision::BeforeWindow: return "BEFORE_WINDOW";
  case FilterDecision::AfterWindow: return "AFTER_WINDOW";
  case FilterDecision::Error: return "ERROR";
  }
  return "ERROR";
}

FilterResult run_filter(const ScanConfig& config, const VulnWindow& window,
                        std::string_view language) {
  return in_stage("filter", [&] {
    const ProjectSet manifest = load_manifest(config.manifest_path);
    const auto manifest_dir = config.manifest_path.parent_path();

    FilterResult result;
    result.manifest_size = manifest.size();
    std::vector<ProjectRecord> corpus;
    for (auto p : filter_by_language(manifest, language)) {
      p.repo_location = resolve_repo_path(p.repo_location, manifest_dir);
      corpus.push_back(std::move(p));
    }
    result.corpus = ProjectSet(std::move(corpus));

    std::vector<ProjectRecord> dated;
    for (const auto& p : result.corpus) {
      CandidateEntry entry{p, FilterDecision::Error, {}};
      if (!p.fork_date) {
        if (is_remote_location(p.repo_location)) {
          entry.reason = std::string(to_string(ErrorCode::UnresolvedForkDate)) +
                         "(" + p.name + "): repository not available locally";
          result.entries.push_back(std::move(entry));
          continue;
        }
        try {
          entry.project =
              resolve_fork_date(p, RepositoryHandle(p.repo_location));
        } catch (const Error& e) {
          entry.reason = std::string(to_string(ErrorCode::UnresolvedForkDate)) +
                         "(" + p.name + "): " + e.what();
          result.entries.push_back(std::move(entry));
          continue;
        }
      }
      dated.push_back(entry.project);
      result.entries.push_back(std::move(entry));
    }

    result.candidates = filter_candidates(ProjectSet(dated), window);
    for (auto& entry : result.entries) {
      if (!entry.project.fork_date)
        continue;
      const auto date = format_timestamp(*entry.project.fork_date);
      if (result.candidates.find(entry.project.name)) {
        entry.decision = FilterDecision::Included;
        entry.reason = "fork date " + date + " within [" +
                       format_timestamp(window.intro_min) + ", " +
                       format_timestamp(window.fix_max) + "]";
      } else if (*entry.project.fork_date < window.intro_min) {
        entry.decision = FilterDecision::BeforeWindow;
        entry.reason = "forked " + date + ", before the flaw was introduced (" +
                       format_timestamp(window.intro_min) + ")";
      } else {
        entry.decision = FilterDecision::AfterWindow;
        entry.reason = "forked " + date + ", after the fix (" +
                       format_timestamp(window.fix_max) + ")";
      }
    }

    json decisions = json::array();
    for (const auto& e : result.entries)
      decisions.push_back(
          {{"name", e.project.name},
           {"repo", e.project.repo_location},
           {"fork_date", e.project.fork_date
                             ? format_timestamp(*e.project.fork_date)
                             : std::string()},
           {"fork_date_source", std::string(to_string(e.project.fork_date_source))},
           {"decision", std::string(to_string(e.decision))},
           {"reason", e.reason}});
    json doc{{"language", std::string(language)},
             {"intro_min", format_timestamp(window.intro_min)},
             {"fix_max", format_timestamp(window.fix_max)},
             {"manifest_size", result.manifest_size},
             {"corpus_size", result.corpus.size()},
             {"candidate_count", result.candidates.size()},
             {"projects", decisions}};
    result.candidates_file = config.output_dir / "candidates.csv";
    result.decisions_file = config.output_dir / "filter.json";
    text::write_file(result.candidates_file,
                     serialize_manifest(result.candidates));
    text::write_file(result.decisions_file, doc.dump(2) + "\n");
    return result;
  });
}

ScanOutcome run_scan(const ScanConfig& config) {
  config.validate();
  const DetectionTest test = in_stage("test", [&] {
    return load_test(config.effective_test());
  });
  const VulnWindow window = in_stage("window", [&] {
    return load_window(config.effective_window());
  });
  const std::string language =
      config.language_filter.empty() ? test.language : config.language_filter;
  if (language.empty())
    throw StageError("filter", Error(ErrorCode::InvalidArgument,
                                     "no language tag in test or config"));

  ScanOutcome outcome;
  outcome.filter = run_filter(config, window, language);
  const FileSelection selection = selection_for(config, test.language.empty()
                                                            ? language
                                                            : test.language);

  std::vector<ProjectVerdict> verdicts(outcome.filter.entries.size());
  std::vector<std::size_t> to_scan;
  for (std::size_t i = 0; i < outcome.filter.entries.size(); ++i) {
    const auto& entry = outcome.filter.entries[i];
    auto& v = verdicts[i];
    v.project = entry.project.name;
    switch (entry.decision) {
    case FilterDecision::Included:
      if (is_remote_location(entry.project.repo_location)) {
        v.status = VerdictStatus::Error;
        v.diagnostic = "repository not available locally: " +
                       entry.project.repo_location;
      } else {
        to_scan.push_back(i);
      }
      break;
    case FilterDecision::BeforeWindow:
    case FilterDecision::AfterWindow:
      v.status = VerdictStatus::FilteredOut;
      v.diagnostic = entry.reason;
      break;
    case FilterDecision::Error:
      v.status = VerdictStatus::Error;
      v.diagnostic = entry.reason;
      break;
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < to_scan.size(); k = next++) {
      const std::size_t i = to_scan[k];
      const auto& project = outcome.filter.entries[i].project;
      try {
        verdicts[i] = scan_project(test, project.name, project.repo_location,
                                   test.profile, selection);
      } catch (const std::exception& e) {
        verdicts[i].status = VerdictStatus::Error;
        verdicts[i].diagnostic = e.what();
      }
    }
  };
  const std::size_t workers = std::min(config.parallelism, to_scan.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back(worker);
  }

  ScanReport& report = outcome.report;
  report.cve_id = test.cve_id;
  report.scan_timestamp = now_utc();
  report.tool_version = std::string(tool_version());
  report.corpus_size = outcome.filter.corpus.size();
  report.filtered_count = outcome.filter.candidates.size();
  report.verdicts = std::move(verdicts);
  canonicalize(report);
  report.settings = {
      {"cve", test.cve_id},
      {"test", config.effective_test().string()},
      {"manifest", config.manifest_path.string()},
      {"language", language},
      {"window", "[" + format_timestamp(window.intro_min) + ", " +
                     format_timestamp(window.fix_max) + "]"},
      {"globs", join(selection.include)},
      {"exclude", join(selection.exclude)},
      {"profile", detail::profile_to_json(test.profile).dump()},
      {"thresholds.vulnerable", [&] {
         std::vector<std::string> t;
         for (auto n : test.vulnerable_thresholds())
           t.push_back(std::to_string(n));
         return join(t);
       }()},
      {"thresholds.fix", [&] {
         std::vector<std::string> t;
         for (auto n : test.fix_thresholds())
           t.push_back(std::to_string(n));
         return join(t);
       }()},
  };

  in_stage("report", [&] {
    outcome.xml_file = config.output_dir / "report.xml";
    outcome.json_file = config.output_dir / "report.json";
    outcome.summary_file = config.output_dir / "summary.txt";
    emit_xml(report, outcome.xml_file);
    emit_json(report, outcome.json_file);
    text::write_file(outcome.summary_file, emit_summary(report));
    return 0;
  });

  outcome.exit_code = 0;
  for (const auto& v : report.verdicts)
    if (v.status == VerdictStatus::Vulnerable)
      outcome.exit_code = 2;
  return outcome;
}

CloneRatioResult run_ratio(const ScanConfig& config,
                           const std::filesystem::path& target,
                           const std::filesystem::path& reference) {
  config.validate();
  return in_stage("ratio", [&] {
    const std::string language =
        config.language_filter.empty() ? "C++" : config.language_filter;
    return clone_ratio(target, reference, config.profile, config.min_block,
                       selection_for(config, language));
  });
}

DetectionTest run_build_test(const ScanConfig& config) {
  config.validate();
  const auto stopwords = in_stage("cve", [&] {
    return load_stopwords(config.effective_stopwords());
  });
  const CveDescriptor cve = in_stage("cve", [&] {
    return load_cve(config.cve_descriptor_path, stopwords);
  });
  return in_stage("build-test", [&] {
    json doc = json::parse(text::read_file(config.annotations_path), nullptr,
                           false);
    if (doc.is_discarded() || !doc.is_object())
      throw Error(ErrorCode::SchemaViolation, "annotations: not a JSON object");

    std::optional<RepositoryHandle> repo;
    auto fragments = [&](const char* key) {
      std::vector<Fragment> out;
      if (!doc.contains(key) || !doc[key].is_array())
        throw Error(ErrorCode::SchemaViolation, std::string("annotations.") + key);
      for (const auto& entry : doc[key]) {
        Fragment f;
        try {
          f.origin.commit = entry.value("commit", std::string{});
          f.origin.file = entry.value("file", std::string{});
          f.origin.start_line = entry.value("start_line", std::size_t{0});
          if (entry.contains("lines")) {
            f.lines = entry["lines"].get<std::vector<std::string>>();
          } else {
            const auto end_line = entry.at("end_line").get<std::size_t>();
            if (f.origin.commit.empty() || f.origin.file.empty() ||
                f.origin.start_line == 0 || end_line < f.origin.start_line)
              throw Error(ErrorCode::SchemaViolation,
                          std::string("annotations.") + key +
                              ": range needs commit, file, start_line <= end_line");
            if (!repo)
              repo.emplace(config.parent_repo_path, config.parent_branch);
            const auto content = text::split_lines(
                repo->git({"show", f.origin.commit + ":" + f.origin.file}));
            if (end_line > content.size())
              throw Error(ErrorCode::SchemaViolation,
                          f.origin.file + " has only " +
                              std::to_string(content.size()) + " lines");
            f.lines.assign(content.begin() +
                               static_cast<std::ptrdiff_t>(f.origin.start_line - 1),
                           content.begin() + static_cast<std::ptrdiff_t>(end_line));
          }
        } catch (const json::exception& e) {
          throw Error(ErrorCode::SchemaViolation,
                      std::string("annotations.") + key + ": " + e.what());
        }
        out.push_back(std::move(f));
      }
      return out;
    };
    DetectionTest test = build_detection_test(cve, fragments("vulnerable"),
                                              fragments("fix"), config.profile);
    save_test(test, config.effective_test());
    return test;
  });
}

} // namespace clonewatch
