#include "scenario.hpp"

#include "fixtures.hpp"

#include <json.hpp>

#include <algorithm>

namespace clonewatch::testing {

namespace {

using Lines = std::vector<std::string>;
using nlohmann::json;

const char* const kCve = R"({
  "id": "CVE-2018-17144",
  "published": "2018-09-19T14:29:00Z",
  "description": "A remote denial of service through a duplicate input in a block, which makes the node crash.",
  "references": ["https://example.org/advisories/duplicate-inputs"],
  "affected_language": "C++"
}
)";

const Lines kPrologue{
    "#include \"validation.h\"",
    "",
    "#include <set>",
    "",
    "bool CheckTransaction(const CTransaction& tx, CValidationState& state,",
    "                      bool fCheckDuplicateInputs)",
    "{",
    "    if (tx.vin.empty())",
    "        return state.DoS(10, false, REJECT_INVALID, \"bad-txns-vin-empty\");",
    "    if (tx.vout.empty())",
    "        return state.DoS(10, false, REJECT_INVALID, \"bad-txns-vout-empty\");",
};

const Lines kEpilogue{
    "    return true;",
    "}",
};

const Lines kVulnerable{
    "    // Check for duplicate inputs",
    "    std::set<COutPoint> vInOutPoints;",
    "    for (const auto& txin : tx.vin) {",
    "        if (fCheckDuplicateInputs && vInOutPoints.count(txin.prevout))",
    "            return state.DoS(100, false, REJECT_INVALID, \"bad-txns-inputs-duplicate\");",
    "        if (fCheckDuplicateInputs)",
    "            vInOutPoints.insert(txin.prevout);",
    "    }",
};

const Lines kFixed{
    "    // Check for duplicate inputs, always",
    "    std::set<COutPoint> vInOutPoints;",
    "    for (const auto& txin : tx.vin) {",
    "        if (!vInOutPoints.insert(txin.prevout).second)",
    "            return state.DoS(100, false, REJECT_INVALID, \"bad-txns-inputs-duplicate\");",
    "    }",
};

Lines concat(std::initializer_list<const Lines*> parts) {
  Lines out;
  for (const auto* p : parts)
    out.insert(out.end(), p->begin(), p->end());
  return out;
}

Lines util_source(int revision) {
  Lines out{"#include \"util.h\"", ""};
  for (int i = 0; i <= revision; ++i) {
    out.push_back("int Helper" + std::to_string(i) + "(int v)");
    out.push_back("{");
    out.push_back("    return v * " + std::to_string(i + 2) + ";");
    out.push_back("}");
    out.push_back("");
  }
  return out;
}

// The flawed block as a downstream project might carry it: different
// indentation, extra comments, embedded in other code.
Lines reworked_vulnerable() {
  Lines out{"// bitcoinplus transaction checks", "namespace plus {", "",
            "bool Check(const CTransaction& tx, CValidationState& state,",
            "           bool fCheckDuplicateInputs) {"};
  for (const auto& line : kVulnerable) {
    std::string l = line;
    l.erase(0, l.find_first_not_of(' '));
    out.push_back("\t" + l + (l.starts_with("//") ? "" : "   /* inherited */"));
  }
  out.push_back("\treturn true;");
  out.push_back("}");
  out.push_back("} // namespace plus");
  return out;
}

} // namespace

Scenario build_scenario(const std::filesystem::path& root) {
  Scenario s;
  s.root = root;
  s.parent = root / "parent";
  s.cve = root / "cve.json";
  s.issues = root / "issues.json";
  s.manifest = root / "manifest.csv";
  s.annotations = root / "annotations.json";
  s.config = root / "config.json";
  s.out = root / "out";
  s.vulnerable_lines = kVulnerable;
  s.fixed_lines = kFixed;

  GitFixture parent(s.parent);
  const Lines base = concat({&kPrologue, &kEpilogue});
  const Lines flawed = concat({&kPrologue, &kVulnerable, &kEpilogue});
  const Lines fixed = concat({&kPrologue, &kFixed, &kEpilogue});

  parent.write_lines("src/validation.cpp", base);
  parent.write_lines("src/util.cpp", util_source(0));
  s.commits.push_back(parent.commit("Initial import", ts("2016-06-01T09:00:00Z")));

  parent.write_lines("src/util.cpp", util_source(1));
  s.commits.push_back(parent.commit("Add helper", ts("2016-09-15T10:30:00Z")));

  parent.write_lines("src/validation.cpp", flawed);
  s.intro_time = ts("2016-11-28T16:05:00Z");
  s.intro_commit = parent.commit("Skip redundant checks in block validation",
                                 ts("2016-11-20T08:00:00Z"), s.intro_time);
  s.commits.push_back(s.intro_commit);

  parent.write("README.md", "Parent node.\n");
  s.commits.push_back(parent.commit("Write readme", ts("2017-04-02T12:00:00Z")));

  parent.write_lines("src/util.cpp", util_source(2));
  s.commits.push_back(parent.commit("Refactor helpers", ts("2017-12-12T12:00:00Z")));

  parent.write_lines("src/validation.cpp", fixed);
  s.fix_time = ts("2018-09-18T21:49:00Z");
  s.fix_commit = parent.commit("[consensus] Fix CVE-2018-17144: always check "
                               "duplicate inputs",
                               ts("2018-09-17T19:00:00Z"), s.fix_time);
  s.commits.push_back(s.fix_commit);

  parent.write("README.md", "Parent node, release 0.16.3.\n");
  s.commits.push_back(parent.commit("Release notes", ts("2018-10-01T12:00:00Z")));

  write_text(s.cve, kCve);

  json issues = json::array();
  issues.push_back({{"issue_id", "14247"},
                    {"labels", {"Fixed", "consensus"}},
                    {"commits", {s.fix_commit}},
                    {"text", "Assertion reachable through duplicate inputs"}});
  issues.push_back({{"issue_id", "13900"},
                    {"labels", {"closed"}},
                    {"commits", {s.commits[4]}},
                    {"text", "Tidy helper module"}});
  issues.push_back({{"issue_id", "14300"},
                    {"labels", {"open"}},
                    {"commits", {s.commits[6]}},
                    {"text", "Release notes should mention CVE-2018-17144"}});
  write_text(s.issues, issues.dump(2) + "\n");

  const auto start = kPrologue.size() + 1;
  json annotations{
      {"vulnerable",
       {{{"commit", s.intro_commit},
         {"file", "src/validation.cpp"},
         {"start_line", start},
         {"end_line", start + kVulnerable.size() - 1}}}},
      {"fix",
       {{{"commit", s.fix_commit},
         {"file", "src/validation.cpp"},
         {"start_line", start},
         {"end_line", start + kFixed.size() - 1}}}}};
  write_text(s.annotations, annotations.dump(2) + "\n");

  const auto projects = root / "projects";
  write_text(projects / "bitcoinplus/src/plus_validation.cpp",
             join_lines(reworked_vulnerable()));
  write_text(projects / "bitcoinplus/README.md", join_lines(kVulnerable));

  GitFixture dup(projects / "dupcoin");
  dup.write_lines("src/validation.cpp", flawed);
  dup.write_lines("src/util.cpp", util_source(1));
  dup.commit("Fork the parent", ts("2017-07-07T07:07:07Z"));
  dup.write("src/coin.cpp", "int Coin() { return 1; }\n");
  dup.commit("Rename the coin", ts("2017-08-01T00:00:00Z"));

  write_text(projects / "patchcoin/src/validation.cpp", join_lines(fixed));
  write_text(projects / "oldcoin/src/validation.cpp", join_lines(base));
  write_text(projects / "othercoin/src/wallet.cpp",
             join_lines({"#include \"wallet.h\"", "", "int Balance() {",
                         "    return 0;", "}"}));

  write_text(s.manifest,
             "name,repo,language,fork_date\n"
             "bitcoinplus,projects/bitcoinplus,C++,2017-03-01T00:00:00Z\n"
             "dupcoin,projects/dupcoin,C++,\n"
             "oldcoin,projects/oldcoin,C++,2015-05-01T00:00:00Z\n"
             "othercoin,projects/othercoin,C++,2018-03-01T00:00:00Z\n"
             "patchcoin,projects/patchcoin,C++,2018-02-01T00:00:00Z\n");

  json config{{"cve", "cve.json"},         {"manifest", "manifest.csv"},
              {"issues", "issues.json"},   {"repo", "parent"},
              {"annotations", "annotations.json"}, {"out", "out"}};
  write_text(s.config, config.dump(2) + "\n");
  return s;
}

} // namespace clonewatch::testing
