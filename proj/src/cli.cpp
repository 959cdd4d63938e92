#include "clonewatch/cli.hpp"

#include "clonewatch/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace clonewatch::cli {

namespace {

// Flags given on the command line; they override the config file.
struct Overrides {
  std::string config;
  std::optional<std::string> manifest, cve, issues, repo, test, window, out,
      language, annotations, stopwords, branch;
  std::optional<std::size_t> jobs, min_block, keywords;
  std::vector<std::string> globs, exclude;
  std::optional<bool> keep_blank_lines;
};

void add_common(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config, "JSON configuration file");
  cmd.add_option("--out", o.out, "Output directory");
}

ScanConfig build_config(const Overrides& o) {
  ScanConfig c;
  if (!o.config.empty())
    c = load_config(o.config, c);
  if (o.manifest) c.manifest_path = *o.manifest;
  if (o.cve) c.cve_descriptor_path = *o.cve;
  if (o.issues) c.issue_export_path = *o.issues;
  if (o.repo) c.parent_repo_path = *o.repo;
  if (o.test) c.detection_test_path = std::filesystem::path(*o.test);
  if (o.window) c.window_path = std::filesystem::path(*o.window);
  if (o.out) c.output_dir = *o.out;
  if (o.language) c.language_filter = *o.language;
  if (o.annotations) c.annotations_path = *o.annotations;
  if (o.stopwords) c.stopwords_path = *o.stopwords;
  if (o.branch) c.parent_branch = *o.branch;
  if (o.jobs) c.parallelism = *o.jobs;
  if (o.min_block) c.min_block = *o.min_block;
  if (o.keywords) c.query_keywords = *o.keywords;
  if (!o.globs.empty()) c.file_globs = o.globs;
  if (!o.exclude.empty()) c.exclude_globs = o.exclude;
  if (o.keep_blank_lines) c.profile.drop_blank_lines = !*o.keep_blank_lines;
  return c;
}

void require(const std::filesystem::path& p, const char* what) {
  if (p.empty())
    throw Error(ErrorCode::InvalidArgument, std::string("missing ") + what);
}

void print_commits(std::ostream& out, const char* title, const CommitSet& set) {
  out << title << " (" << set.size() << "):\n";
  for (const auto& c : set)
    out << "  " << c.hash.substr(0, 12) << "  "
        << format_timestamp(c.committer_date) << "  "
        << c.message.substr(0, c.message.find('\n')) << '\n';
}

int cmd_szz(const ScanConfig& c, std::ostream& out) {
  require(c.cve_descriptor_path, "--cve");
  require(c.issue_export_path, "--issues");
  require(c.parent_repo_path, "--repo");
  SzzResult r = run_szz(c);
  out << "pattern: " << r.pattern << '\n';
  print_commits(out, "bug-fixing commits", r.window.fix_commits);
  print_commits(out, "bug-introducing commits", r.window.intro_commits);
  out << "window: [" << format_timestamp(r.window.intro_min) << ", "
      << format_timestamp(r.window.fix_max) << "]\n";
  out << "written: " << r.window_file.string() << '\n';
  return 0;
}

int cmd_filter(const ScanConfig& c, std::ostream& out) {
  require(c.manifest_path, "--manifest");
  std::string language = c.language_filter;
  if (language.empty() && c.detection_test_path)
    language = load_test(*c.detection_test_path).language;
  if (language.empty())
    throw Error(ErrorCode::InvalidArgument, "missing --language");
  const VulnWindow window = load_window(c.effective_window());
  FilterResult r = run_filter(c, window, language);
  for (const auto& e : r.entries)
    out << to_string(e.decision) << "  " << e.project.name << "  " << e.reason
        << '\n';
  out << r.candidates.size() << " of " << r.corpus.size() << " " << language
      << " projects are candidates (manifest: " << r.manifest_size << ")\n";
  out << "written: " << r.candidates_file.string() << ", "
      << r.decisions_file.string() << '\n';
  return 0;
}

int cmd_scan(const ScanConfig& c, std::ostream& out) {
  require(c.manifest_path, "--manifest");
  ScanOutcome r = run_scan(c);
  out << emit_summary(r.report);
  out << "written: " << r.xml_file.string() << ", " << r.json_file.string()
      << ", " << r.summary_file.string() << '\n';
  return r.exit_code;
}

int cmd_build_test(const ScanConfig& c, std::ostream& out) {
  require(c.cve_descriptor_path, "--cve");
  require(c.annotations_path, "--annotations");
  DetectionTest t = run_build_test(c);
  out << t.cve_id << ": " << t.vulnerable_snippets.size()
      << " vulnerable snippet(s), " << t.fix_snippets.size()
      << " fix snippet(s)\n";
  for (const auto& s : t.vulnerable_snippets)
    out << "  VULNERABLE threshold " << s.threshold << "  " << s.origin.file
        << '\n';
  for (const auto& s : t.fix_snippets)
    out << "  FIX        threshold " << s.threshold << "  " << s.origin.file
        << '\n';
  out << "written: " << c.effective_test().string() << '\n';
  return 0;
}

int cmd_ratio(const ScanConfig& c, const std::string& target,
              const std::string& reference, std::ostream& out) {
  CloneRatioResult r = run_ratio(c, target, reference);
  char pct[32];
  std::snprintf(pct, sizeof pct, "%.2f%%", 100.0 * r.ratio());
  out << "target:    " << r.target << '\n'
      << "reference: " << r.reference << '\n'
      << "min block: " << r.min_block << '\n'
      << "cloned K:  " << r.cloned_lines << '\n'
      << "total T:   " << r.total_lines << '\n'
      << "ratio:     " << r.ratio() << " (" << pct << ")\n";
  return 0;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Find forks that inherited a disclosed vulnerability but not "
               "its fix.",
               "clonewatch"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  Overrides o;
  std::string target, reference;

  auto* szz = app.add_subcommand("szz", "Locate fixing and introducing commits "
                                        "and derive the vulnerability window");
  add_common(*szz, o);
  szz->add_option("--cve", o.cve, "CVE descriptor (JSON)");
  szz->add_option("--issues", o.issues, "Issue-tracker export (JSON)");
  szz->add_option("--repo", o.repo, "Parent project repository");
  szz->add_option("--branch", o.branch, "Parent branch (default HEAD)");
  szz->add_option("--stopwords", o.stopwords, "Stopword list");
  szz->add_option("--keywords", o.keywords, "Keywords in the issue pattern");
  szz->add_option("--window", o.window, "Where to write the window");

  auto* filter = app.add_subcommand("filter", "Select monitored projects forked "
                                              "inside the window");
  add_common(*filter, o);
  filter->add_option("--manifest", o.manifest, "Project manifest (CSV)");
  filter->add_option("--window", o.window, "Window file from `szz`");
  filter->add_option("--language", o.language, "Language tag, e.g. C++");
  filter->add_option("--test", o.test, "Detection test (supplies the language)");

  auto* build = app.add_subcommand("build-test", "Package annotated code into "
                                                 "a detection test");
  add_common(*build, o);
  build->add_option("--cve", o.cve, "CVE descriptor (JSON)");
  build->add_option("--annotations", o.annotations, "Annotation file (JSON)");
  build->add_option("--repo", o.repo, "Parent repository for line ranges");
  build->add_option("--test", o.test, "Where to write the detection test");
  build->add_option("--stopwords", o.stopwords, "Stopword list");
  build->add_flag("--keep-blank-lines", o.keep_blank_lines,
                  "Keep blank lines when normalizing");

  auto* scan = app.add_subcommand("scan", "Clone-scan the candidate projects");
  add_common(*scan, o);
  scan->add_option("--manifest", o.manifest, "Project manifest (CSV)");
  scan->add_option("--test", o.test, "Detection test from `build-test`");
  scan->add_option("--window", o.window, "Window file from `szz`");
  scan->add_option("--language", o.language, "Language tag, e.g. C++");
  scan->add_option("--jobs", o.jobs, "Projects scanned in parallel");
  scan->add_option("--glob", o.globs, "File glob to scan (repeatable)");
  scan->add_option("--exclude", o.exclude, "File glob to skip (repeatable)");

  auto* ratio = app.add_subcommand("ratio", "Clone ratio K/T of a target tree "
                                            "against a reference tree");
  add_common(*ratio, o);
  ratio->add_option("target", target, "Target source tree")->required();
  ratio->add_option("reference", reference, "Reference source tree")->required();
  ratio->add_option("--min-block", o.min_block, "Smallest counted block");
  ratio->add_option("--language", o.language, "Language tag for file globs");
  ratio->add_option("--glob", o.globs, "File glob (repeatable)");
  ratio->add_option("--exclude", o.exclude, "File glob to skip (repeatable)");
  ratio->add_flag("--keep-blank-lines", o.keep_blank_lines,
                  "Keep blank lines when normalizing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    ScanConfig config = build_config(o);
    if (name == "szz")
      return cmd_szz(config, out);
    if (name == "filter")
      return cmd_filter(config, out);
    if (name == "build-test")
      return cmd_build_test(config, out);
    if (name == "scan")
      return cmd_scan(config, out);
    return cmd_ratio(config, target, reference, out);
  } catch (const StageError& e) {
    err << "clonewatch " << name << ": [" << e.stage() << "] " << e.what()
        << '\n';
  } catch (const Error& e) {
    err << "clonewatch " << name << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "clonewatch " << name << ": " << e.what() << '\n';
  }
  return 1;
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("clonewatch");
  for (const auto& a : args)
    argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace clonewatch::cli
