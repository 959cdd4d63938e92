#include "clonewatch/cli.hpp"
#include "clonewatch/pipeline.hpp"
#include "clonewatch/text.hpp"

#include "fixtures.hpp"
#include "scenario.hpp"

#include <doctest.h>

#include <json.hpp>

#include <regex>
#include <sstream>

using namespace clonewatch;
using namespace clonewatch::testing;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string strip_timing(std::string doc) {
  static const std::regex timing(
      R"re((timestamp|processingTime|scan_timestamp|elapsed_ns)("?\s*[:=]\s*"?)[^",}\s]*)re");
  return std::regex_replace(doc, timing, "$1$2#");
}

VulnWindow window_between(const char* from, const char* to) {
  VulnWindow w;
  w.intro_min = ts(from);
  w.fix_max = ts(to);
  return w;
}

} // namespace

TEST_CASE("szz stage on the scenario history") {
  TempDir dir;
  auto s = build_scenario(dir.path());
  auto r = cli_run({"szz", "--config", s.config.string()});
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("window: [2016-11-28T16:05:00Z, 2018-09-18T21:49:00Z]") !=
        std::string::npos);

  auto w = load_window(s.out / "window.json");
  REQUIRE(w.fix_commits.size() == 1);
  CHECK(w.fix_commits[0].hash == s.fix_commit);
  REQUIRE(w.intro_commits.size() == 1);
  CHECK(w.intro_commits[0].hash == s.intro_commit);
  CHECK(w.intro_min == s.intro_time);
  CHECK(w.fix_max == s.fix_time);
}

TEST_CASE("szz: missing issue export is reported with its stage") {
  TempDir dir;
  auto s = build_scenario(dir.path());
  auto r = cli_run({"szz", "--config", s.config.string(), "--issues",
                    (dir / "nope.json").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("[issues] FILE_NOT_FOUND") != std::string::npos);
}

TEST_CASE("szz: a fix older than its introducing commit is an inverted window") {
  TempDir dir;
  GitFixture repo(dir / "repo");
  repo.write_lines("a.cpp", {"int a;", "int b;"});
  repo.commit("base", ts("2018-01-01T00:00:00Z"));
  repo.write_lines("a.cpp", {"int a;", "int bad;"});
  repo.commit("introduce", ts("2018-06-01T00:00:00Z"));
  repo.write_lines("a.cpp", {"int a;", "int good;"});
  // committed after, but its clock claims an earlier date
  auto fix = repo.commit("Fix CVE-2018-0001", ts("2018-03-01T00:00:00Z"));
  write_text(dir / "issues.json", R"([{"issue_id": "1", "labels": ["fixed"],
                                       "commits": [")" + fix + R"("]}])");
  write_text(dir / "cve.json", R"({"id": "CVE-2018-0001",
      "published": "2018-07-01", "description": "overflow",
      "affected_language": "C++"})");
  auto r = cli_run({"szz", "--cve", (dir / "cve.json").string(), "--issues",
                    (dir / "issues.json").string(), "--repo",
                    (dir / "repo").string(), "--out", (dir / "out").string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("[szz] INVERTED_WINDOW") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "out/window.json"));
}

TEST_CASE("filter: five projects around the window") {
  TempDir dir;
  write_text(dir / "manifest.csv",
             "name,repo,language,fork_date\n"
             "early,https://example.org/early.git,C++,2016-01-01T00:00:00Z\n"
             "at_start,https://example.org/a.git,C++,2016-11-28T16:05:00Z\n"
             "inside,https://example.org/b.git,C++,2017-06-15T00:00:00Z\n"
             "late,https://example.org/c.git,C++,2018-09-18T21:49:01Z\n"
             "later,https://example.org/d.git,C++,2019-01-01T00:00:00Z\n"
             "script,https://example.org/e.git,Python,2017-01-01T00:00:00Z\n");
  ScanConfig c;
  c.manifest_path = dir / "manifest.csv";
  c.output_dir = dir / "out";
  auto r = run_filter(c, window_between("2016-11-28T16:05:00Z",
                                        "2018-09-18T21:49:00Z"),
                      "c++");
  CHECK(r.manifest_size == 6);
  CHECK(r.corpus.size() == 5);
  REQUIRE(r.candidates.size() == 2);
  CHECK(r.candidates[0].name == "at_start");
  CHECK(r.candidates[1].name == "inside");

  auto rows = text::split_lines(text::read_file(r.candidates_file));
  CHECK(rows.size() == 1 + r.candidates.size());
  auto decisions = nlohmann::json::parse(text::read_file(r.decisions_file));
  CHECK(decisions["projects"].size() == 5);
  CHECK(decisions["projects"][0]["decision"] == "INCLUDED");
  CHECK(decisions["projects"][1]["decision"] == "BEFORE_WINDOW");
}

TEST_CASE("filter: zero candidates still succeeds") {
  TempDir dir;
  write_text(dir / "manifest.csv",
             "name,repo,language,fork_date\n"
             "late,https://example.org/c.git,C++,2020-01-01T00:00:00Z\n");
  save_window(window_between("2016-01-01T00:00:00Z", "2017-01-01T00:00:00Z"),
              dir / "window.json");
  auto r = cli_run({"filter", "--manifest", (dir / "manifest.csv").string(),
                    "--window", (dir / "window.json").string(), "--language",
                    "C++", "--out", (dir / "out").string()});
  INFO(r.err);
  CHECK(r.code == 0);
  CHECK(r.out.find("0 of 1 C++ projects are candidates") != std::string::npos);
  CHECK(text::split_lines(text::read_file(dir / "out/candidates.csv")).size() == 1);
}

TEST_CASE("filter: unresolvable fork dates are listed, not fatal") {
  TempDir dir;
  write_text(dir / "empty/readme", "not a repo\n");
  write_text(dir / "manifest.csv",
             "name,repo,language,fork_date\n"
             "remote,https://example.org/r.git,C++,\n"
             "norepo,empty,C++,\n"
             "fine,https://example.org/f.git,C++,2017-01-01\n");
  ScanConfig c;
  c.manifest_path = dir / "manifest.csv";
  c.output_dir = dir / "out";
  auto r = run_filter(c, window_between("2016-01-01T00:00:00Z",
                                        "2018-01-01T00:00:00Z"),
                      "C++");
  REQUIRE(r.entries.size() == 3);
  CHECK(r.entries[0].project.name == "fine");
  CHECK(r.entries[0].decision == FilterDecision::Included);
  CHECK(r.entries[1].decision == FilterDecision::Error);
  CHECK(r.entries[1].reason.starts_with("UNRESOLVED_FORK_DATE(norepo)"));
  CHECK(r.entries[2].decision == FilterDecision::Error);
  CHECK(r.candidates.size() == 1);
}

TEST_CASE("full pipeline through the command line") {
  TempDir dir;
  auto s = build_scenario(dir.path());
  const auto config = s.config.string();
  REQUIRE(cli_run({"szz", "--config", config}).code == 0);
  auto built = cli_run({"build-test", "--config", config});
  INFO(built.err);
  REQUIRE(built.code == 0);
  CHECK(built.out.find("VULNERABLE threshold 7") != std::string::npos);
  CHECK(built.out.find("FIX        threshold 5") != std::string::npos);

  auto filter = cli_run({"filter", "--config", config, "--test",
                         (s.out / "detection_test.json").string()});
  CHECK(filter.code == 0);
  CHECK(filter.out.find("4 of 5 C++ projects are candidates") != std::string::npos);

  auto scan = cli_run({"scan", "--config", config});
  INFO(scan.err);
  CHECK(scan.code == 2);
  auto report = parse_json(text::read_file(s.out / "report.json"));
  std::map<std::string, VerdictStatus> got;
  for (const auto& v : report.verdicts)
    got[v.project] = v.status;
  CHECK(got == std::map<std::string, VerdictStatus>{
                   {"bitcoinplus", VerdictStatus::Vulnerable},
                   {"dupcoin", VerdictStatus::Vulnerable},
                   {"oldcoin", VerdictStatus::FilteredOut},
                   {"othercoin", VerdictStatus::NotAffected},
                   {"patchcoin", VerdictStatus::Fixed}});
  CHECK(report.corpus_size == 5);
  CHECK(report.filtered_count == 4);
  CHECK(validate_xml(text::read_file(s.out / "report.xml")).empty());
  CHECK(text::read_file(s.out / "summary.txt")
            .find("TOTAL: VULNERABLE 2, FIXED 1, NOT_AFFECTED 1, FILTERED_OUT 1, ERROR 0") !=
        std::string::npos);

  const auto& plus = report.verdicts[0];
  REQUIRE(plus.vuln_matches.size() == 1);
  CHECK(plus.vuln_matches[0].source_file == "src/plus_validation.cpp");
  CHECK(plus.vuln_matches[0].start_line == 7);
  CHECK(plus.vuln_matches[0].end_line == 13);
  CHECK(plus.vuln_matches[0].line_count == 7);
}

TEST_CASE("scan: exit 0 when every candidate is fixed") {
  TempDir dir;
  auto s = build_scenario(dir.path());
  REQUIRE(cli_run({"szz", "--config", s.config.string()}).code == 0);
  REQUIRE(cli_run({"build-test", "--config", s.config.string()}).code == 0);
  write_text(dir / "fixed-only.csv",
             "name,repo,language,fork_date\n"
             "patchcoin,projects/patchcoin,C++,2018-02-01T00:00:00Z\n"
             "oldcoin,projects/oldcoin,C++,2015-05-01T00:00:00Z\n");
  auto r = cli_run({"scan", "--config", s.config.string(), "--manifest",
                    (dir / "fixed-only.csv").string()});
  INFO(r.err);
  CHECK(r.code == 0);
}

TEST_CASE("scan: reports are identical for any worker count") {
  TempDir dir;
  auto s = build_scenario(dir.path());
  REQUIRE(cli_run({"szz", "--config", s.config.string()}).code == 0);
  REQUIRE(cli_run({"build-test", "--config", s.config.string()}).code == 0);
  const auto test = (s.out / "detection_test.json").string();
  const auto window = (s.out / "window.json").string();
  std::vector<std::string> xml, json;
  for (const char* jobs : {"1", "8", "3"}) {
    const auto out = (dir / (std::string("jobs") + jobs)).string();
    auto r = cli_run({"scan", "--config", s.config.string(), "--test", test,
                      "--window", window, "--jobs", jobs, "--out", out});
    CHECK(r.code == 2);
    xml.push_back(strip_timing(text::read_file(out + "/report.xml")));
    json.push_back(strip_timing(text::read_file(out + "/report.json")));
  }
  CHECK(xml[0] == xml[1]);
  CHECK(xml[0] == xml[2]);
  CHECK(json[0] == json[1]);
  CHECK(json[0] == json[2]);
  CHECK(xml[0].find("processingTime=\"#\"") != std::string::npos);
}

TEST_CASE("scan: missing detection test is an operational error") {
  TempDir dir;
  auto s = build_scenario(dir.path());
  auto r = cli_run({"scan", "--config", s.config.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("[test] IO") != std::string::npos);
}

TEST_CASE("ratio subcommand") {
  TempDir dir;
  std::vector<std::string> shared, target;
  for (int i = 0; i < 6; ++i)
    shared.push_back("shared_" + std::to_string(i) + "();");
  target = {"mine_0();", "mine_1();"};
  target.insert(target.end(), shared.begin(), shared.end());
  target.push_back("mine_2();");
  target.push_back("mine_3();");
  write_text(dir / "t/a.cpp", join_lines(target));
  write_text(dir / "r/a.cpp", join_lines(shared));

  auto r = cli_run({"ratio", (dir / "t").string(), (dir / "r").string(),
                    "--min-block", "4"});
  INFO(r.err);
  CHECK(r.code == 0);
  CHECK(r.out.find("cloned K:  6") != std::string::npos);
  CHECK(r.out.find("total T:   10") != std::string::npos);
  CHECK(r.out.find("(60.00%)") != std::string::npos);

  auto self = cli_run({"ratio", (dir / "t").string(), (dir / "t").string()});
  CHECK(self.out.find("(100.00%)") != std::string::npos);

  auto bad = cli_run({"ratio", (dir / "t").string(), (dir / "r").string(),
                      "--min-block", "1"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("INVALID_ARGUMENT") != std::string::npos);
}

TEST_CASE("command line usage errors") {
  CHECK(cli_run({}).code == 1);
  CHECK(cli_run({"frobnicate"}).code == 1);
  CHECK(cli_run({"--help"}).code == 0);
  CHECK(cli_run({"scan", "--jobs", "many"}).code == 1);
  auto missing = cli_run({"szz"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("missing --cve") != std::string::npos);
}

TEST_CASE("config file values and command-line overrides") {
  TempDir dir;
  write_text(dir / "cfg/config.json", R"({"manifest": "m.csv", "jobs": 4,
      "out": "/abs/out", "globs": ["*.cc"], "profile": {"drop_blank_lines": false}})");
  auto c = load_config(dir / "cfg/config.json");
  CHECK(c.manifest_path == dir / "cfg/m.csv");
  CHECK(c.output_dir == "/abs/out");
  CHECK(c.parallelism == 4);
  CHECK(c.file_globs == std::vector<std::string>{"*.cc"});
  CHECK_FALSE(c.profile.drop_blank_lines);
  CHECK(c.profile.line_comment_markers == std::vector<std::string>{"//"});

  write_text(dir / "bad.json", R"({"jobs": "four"})");
  CHECK_THROWS_AS(load_config(dir / "bad.json"), Error);
  ScanConfig zero;
  zero.parallelism = 0;
  CHECK_THROWS_AS(zero.validate(), Error);
}
