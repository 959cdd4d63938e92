#include "clonewatch/testgen.hpp"

#include "clonewatch/cve.hpp"
#include "clonewatch/error.hpp"
#include "clonewatch/text.hpp"
#include "profile_json.hpp"

#include <json.hpp>

namespace clonewatch {

using nlohmann::json;

std::string_view to_string(SnippetLabel label) {
  return label == SnippetLabel::Vulnerable ? "VULNERABLE" : "FIX";
}

namespace {

std::vector<std::size_t> thresholds_of(const std::vector<CodeSnippet>& snippets) {
  std::vector<std::size_t> out;
  out.reserve(snippets.size());
  for (const auto& s : snippets)
    out.push_back(s.threshold);
  return out;
}

// Returns false when nothing survives normalization.
bool make_snippet(SnippetLabel label, std::vector<std::string> lines,
                  SnippetOrigin origin, const NormalizationProfile& profile,
                  CodeSnippet& out) {
  out.label = label;
  out.source_lines = std::move(lines);
  out.origin = std::move(origin);
  out.normalized = normalize_source(out.source_lines, profile).lines;
  out.threshold = out.normalized.size();
  return !out.normalized.empty();
}

std::string fragment_name(SnippetLabel label, std::size_t index) {
  return std::string(label == SnippetLabel::Vulnerable ? "vulnerable" : "fix") +
         "[" + std::to_string(index) + "]";
}

} // namespace

std::vector<std::size_t> DetectionTest::vulnerable_thresholds() const {
  return thresholds_of(vulnerable_snippets);
}

std::vector<std::size_t> DetectionTest::fix_thresholds() const {
  return thresholds_of(fix_snippets);
}

DetectionTest build_detection_test(const CveDescriptor& cve,
                                   const std::vector<Fragment>& vuln_fragments,
                                   const std::vector<Fragment>& fix_fragments,
                                   const NormalizationProfile& profile) {
  if (vuln_fragments.empty())
    throw Error(ErrorCode::InvalidArgument, "no vulnerable fragments");
  if (fix_fragments.empty())
    throw Error(ErrorCode::InvalidArgument, "no fix fragments");
  profile.validate();

  DetectionTest test;
  test.cve_id = cve.id;
  test.language = cve.affected_language;
  test.profile = profile;
  auto add = [&](SnippetLabel label, const std::vector<Fragment>& fragments,
                 std::vector<CodeSnippet>& into) {
    for (std::size_t i = 0; i < fragments.size(); ++i) {
      CodeSnippet s;
      if (!make_snippet(label, fragments[i].lines, fragments[i].origin, profile,
                        s))
        throw Error(ErrorCode::EmptyAfterNormalization, fragment_name(label, i));
      into.push_back(std::move(s));
    }
  };
  add(SnippetLabel::Vulnerable, vuln_fragments, test.vulnerable_snippets);
  add(SnippetLabel::Fix, fix_fragments, test.fix_snippets);
  return test;
}

std::string serialize_test(const DetectionTest& test) {
  json snippets = json::array();
  auto emit = [&](const std::vector<CodeSnippet>& list) {
    for (const auto& s : list)
      snippets.push_back({{"label", std::string(to_string(s.label))},
                          {"origin",
                           {{"commit", s.origin.commit},
                            {"file", s.origin.file},
                            {"start_line", s.origin.start_line}}},
                          {"lines", s.source_lines},
                          {"threshold", s.threshold}});
  };
  emit(test.vulnerable_snippets);
  emit(test.fix_snippets);
  json doc{{"format", "clonewatch-detection-test"},
           {"version", 1},
           {"cve_id", test.cve_id},
           {"language", test.language},
           {"profile", detail::profile_to_json(test.profile)},
           {"snippets", snippets}};
  return doc.dump(2) + "\n";
}

DetectionTest deserialize_test(std::string_view document) {
  json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw Error(ErrorCode::SchemaViolation, "not a JSON object");
  if (doc.value("format", "") != "clonewatch-detection-test")
    throw Error(ErrorCode::SchemaViolation, "format");
  if (doc.value("version", 0) != 1)
    throw Error(ErrorCode::SchemaViolation, "version");

  DetectionTest test;
  try {
    test.cve_id = doc.at("cve_id").get<std::string>();
    test.language = doc.value("language", std::string{});
  } catch (const json::exception&) {
    throw Error(ErrorCode::SchemaViolation, "cve_id");
  }
  if (!is_cve_id(test.cve_id))
    throw Error(ErrorCode::SchemaViolation, "cve_id");
  test.profile = doc.contains("profile")
                     ? detail::profile_from_json(doc["profile"])
                     : NormalizationProfile{};

  if (!doc.contains("snippets") || !doc["snippets"].is_array())
    throw Error(ErrorCode::SchemaViolation, "snippets");
  const auto& entries = doc["snippets"];
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string where = "snippets[" + std::to_string(i) + "]";
    const json& e = entries[i];
    SnippetLabel label;
    std::vector<std::string> lines;
    SnippetOrigin origin;
    std::size_t threshold = 0;
    try {
      const auto label_name = e.at("label").get<std::string>();
      if (label_name == "VULNERABLE")
        label = SnippetLabel::Vulnerable;
      else if (label_name == "FIX")
        label = SnippetLabel::Fix;
      else
        throw Error(ErrorCode::SchemaViolation, where + ".label");
      lines = e.at("lines").get<std::vector<std::string>>();
      threshold = e.at("threshold").get<std::size_t>();
      if (e.contains("origin")) {
        const auto& o = e["origin"];
        origin.commit = o.value("commit", std::string{});
        origin.file = o.value("file", std::string{});
        origin.start_line = o.value("start_line", std::size_t{0});
      }
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::SchemaViolation, where + ": " + ex.what());
    }
    CodeSnippet s;
    if (!make_snippet(label, std::move(lines), std::move(origin), test.profile,
                      s))
      throw Error(ErrorCode::SchemaViolation, where + ": no code after normalization");
    if (s.threshold != threshold)
      throw Error(ErrorCode::SchemaViolation,
                  where + ": threshold " + std::to_string(threshold) +
                      " != normalized length " + std::to_string(s.threshold));
    (label == SnippetLabel::Vulnerable ? test.vulnerable_snippets
                                       : test.fix_snippets)
        .push_back(std::move(s));
  }
  if (test.vulnerable_snippets.empty())
    throw Error(ErrorCode::SchemaViolation, "no VULNERABLE snippet");
  if (test.fix_snippets.empty())
    throw Error(ErrorCode::SchemaViolation, "no FIX snippet");
  return test;
}

void save_test(const DetectionTest& test, const std::filesystem::path& path) {
  text::write_file(path, serialize_test(test));
}

DetectionTest load_test(const std::filesystem::path& path) {
  std::string content;
  try {
    content = text::read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::Io, e.what());
  }
  return deserialize_test(content);
}

} // namespace clonewatch
