#include "clonewatch/cve.hpp"
#include "clonewatch/error.hpp"
#include "clonewatch/pipeline.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <random>
#include <regex>

using namespace clonewatch;

namespace {

const std::filesystem::path kFixtures = CLONEWATCH_TEST_FIXTURES;

std::regex icase(const std::string& pattern) {
  return std::regex(pattern, std::regex::ECMAScript | std::regex::icase);
}

std::string descriptor(const std::string& id, const std::string& description) {
  return R"({"id": ")" + id + R"(", "published": "2018-09-19T14:29:00Z",
             "description": ")" + description + R"(",
             "references": [], "affected_language": "C++"})";
}

} // namespace

TEST_CASE("CVE id pattern") {
  CHECK(is_cve_id("CVE-2018-17144"));
  CHECK(is_cve_id("CVE-2019-7167"));
  CHECK(is_cve_id("CVE-2021-1234567"));
  CHECK_FALSE(is_cve_id("CVE-18-1"));
  CHECK_FALSE(is_cve_id("cve-2018-17144"));
  CHECK_FALSE(is_cve_id("CVE-2018-123"));
  CHECK_FALSE(is_cve_id("CVE-2018-17144x"));
}

TEST_CASE("keywords: stopwords removed, first-position order on ties") {
  StopwordSet stop{"of", "via"};
  CHECK(extract_keywords("Remote denial of service via duplicate input", stop) ==
        std::vector<std::string>{"remote", "denial", "service", "duplicate",
                                 "input"});
}

TEST_CASE("keywords: frequency first") {
  CHECK(extract_keywords("bug bug bug fix", {}) ==
        std::vector<std::string>{"bug", "fix"});
  CHECK(extract_keywords("a b b c c c", {}) ==
        std::vector<std::string>{"c", "b", "a"});
}

TEST_CASE("keywords: empty and all-stopword text") {
  CHECK(extract_keywords("", {}).empty());
  CHECK(extract_keywords("of the via", StopwordSet{"of", "the", "via"}).empty());
}

TEST_CASE("keywords: a CVE id in the text yields 'cve' and the id") {
  auto k = extract_keywords("Fix for CVE-2018-17144: duplicate inputs", {"for"});
  REQUIRE(k.size() >= 2);
  CHECK(k[0] == "fix");
  CHECK(k[1] == "cve");
  CHECK(k[2] == "cve-2018-17144");
  CHECK(std::find(k.begin(), k.end(), "2018") == k.end());

  auto exempt = extract_keywords("see CVE-2018-17144", {"cve", "see"});
  CHECK(exempt == std::vector<std::string>{"cve", "cve-2018-17144"});
}

TEST_CASE("keyword invariants on random text") {
  std::mt19937_64 rng(99);
  const std::vector<std::string> vocab{"Block", "input", "DUPLICATE", "of", "the",
                                       "CVE-2018-17144", "node", "crash", "-",
                                       "x1", "assert()", "cve"};
  StopwordSet stop{"of", "the"};
  for (int round = 0; round < 200; ++round) {
    std::string text;
    for (int i = 0; i < 12; ++i)
      text += vocab[rng() % vocab.size()] + (rng() % 3 ? " " : ", ");
    auto k = extract_keywords(text, stop);
    CHECK(extract_keywords(text, stop) == k);
    std::set<std::string> seen;
    const std::string lower = [&] {
      std::string s = text;
      for (auto& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      return s;
    }();
    for (const auto& token : k) {
      CHECK(seen.insert(token).second);
      CHECK(lower.find(token) != std::string::npos);
      CHECK(token == [&] {
        std::string s = token;
        for (auto& c : s)
          c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
      }());
      if (token != "cve")
        CHECK_FALSE(stop.contains(token));
    }
  }
}

TEST_CASE("parse the CVE-2018-17144 descriptor") {
  auto stop = load_stopwords(default_data_dir() / "stopwords.txt");
  auto cve = load_cve(kFixtures / "cve-2018-17144.json", stop);
  CHECK(cve.id == "CVE-2018-17144");
  CHECK(cve.affected_language == "C++");
  CHECK(format_timestamp(cve.published) == "2018-09-19T14:29:00Z");
  CHECK(cve.reference_links.size() == 2);
  CHECK(cve.reference_links[1] == "https://bitcoincore.org/en/2018/09/20/notice/");
  CHECK(cve.affected_projects.size() == 3);
  CHECK(cve.code_specific);
  CHECK(cve.introduced_version == "0.14.0");
  CHECK(cve.fixed_version == "0.16.3");
  CHECK(cve.keywords == extract_keywords(cve.description, stop));
  CHECK(std::find(cve.keywords.begin(), cve.keywords.end(), "duplicate") !=
        cve.keywords.end());
}

TEST_CASE("descriptor errors") {
  auto expect = [](const std::string& doc, ErrorCode code) {
    try {
      parse_cve(doc, {});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == code);
    }
  };
  expect(descriptor("CVE-18-1", "x"), ErrorCode::BadCveId);
  expect("not json", ErrorCode::SchemaViolation);
  expect(R"({"id": "CVE-2018-17144"})", ErrorCode::SchemaViolation);
  expect(R"({"id": "CVE-2018-17144", "published": "yesterday",
             "description": "x", "affected_language": "C++"})",
         ErrorCode::SchemaViolation);
  expect(R"({"id": "CVE-2018-17144", "published": "2018-09-19T14:29:00Z",
             "description": "x", "affected_language": "C++",
             "protocol_level": "yes"})",
         ErrorCode::SchemaViolation);
}

TEST_CASE("protocol-level flaws are not code specific") {
  auto cve = parse_cve(R"({"id": "CVE-2014-0160", "published": "2014-04-07",
                           "description": "TLS heartbeat read overrun",
                           "affected_language": "C", "protocol_level": true})",
                       {});
  CHECK_FALSE(cve.code_specific);
}

TEST_CASE("NVD-shaped descriptions are accepted") {
  auto cve = parse_cve(R"({"cve": {"id": "CVE-2018-17144",
      "published": "2018-09-19T14:29:00.000Z",
      "descriptions": [{"lang": "es", "value": "denegacion"},
                       {"lang": "en", "value": "duplicate input crash"}],
      "references": [{"url": "https://example.org"}],
      "affected_language": "C++"}})",
                       {});
  CHECK(cve.description == "duplicate input crash");
  CHECK(cve.reference_links == std::vector<std::string>{"https://example.org"});
}

TEST_CASE("only-stopword description gives no keywords") {
  auto cve = parse_cve(descriptor("CVE-2018-17144", "of the and"),
                       StopwordSet{"of", "the", "and"});
  CHECK(cve.keywords.empty());
}

TEST_CASE("issue query") {
  CveDescriptor cve;
  cve.id = "CVE-2018-17144";
  cve.keywords = {"denial", "service", "duplicate"};

  auto pattern = build_issue_query(cve, 2);
  auto re = icase(pattern);
  for (const char* hit : {"CVE-2018-17144", "cve", "Denial of service",
                          "SERVICE", "Fix CVE-2018-17144"})
    CHECK_MESSAGE(std::regex_search(std::string(hit), re), hit);
  CHECK_FALSE(std::regex_search(std::string("duplicate"), re));
  CHECK_FALSE(std::regex_search(std::string("unrelated refactor"), re));

  SUBCASE("k = 0 keeps only the id and CVE") {
    CHECK(build_issue_query(cve, 0) == "CVE-2018-17144|CVE");
  }
  SUBCASE("regex metacharacters in keywords are literal") {
    CveDescriptor odd = cve;
    odd.keywords = {"a.b", "c++"};
    auto r = icase(build_issue_query(odd, 2));
    CHECK(std::regex_search(std::string("uses c++"), r));
    CHECK(std::regex_search(std::string("a.b"), r));
    CHECK_FALSE(std::regex_search(std::string("axb"), r));
  }
  SUBCASE("the id and cve tokens are not repeated from the keywords") {
    CveDescriptor with_id = cve;
    with_id.keywords = {"cve", "cve-2018-17144", "denial"};
    CHECK(build_issue_query(with_id, 1) == "CVE-2018-17144|CVE|denial");
  }
  SUBCASE("always matches the id itself") {
    for (std::size_t k = 0; k < 5; ++k)
      CHECK(std::regex_search(cve.id, icase(build_issue_query(cve, k))));
  }
}

TEST_CASE("stopword files ignore comments and blank lines") {
  auto s = parse_stopwords("# header\nThe\n\n  of \n");
  CHECK(s == StopwordSet{"of", "the"});
}
