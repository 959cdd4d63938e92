#include "clonewatch/cve.hpp"

#include "clonewatch/error.hpp"
#include "clonewatch/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>

namespace clonewatch {

using nlohmann::json;

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)); }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

// Length of a CVE id starting at pos, or 0.
std::size_t cve_id_length(std::string_view s, std::size_t pos) {
  if (pos + 13 > s.size() || !text::iequals(s.substr(pos, 4), "cve-"))
    return 0;
  std::size_t i = pos + 4;
  for (std::size_t k = 0; k < 4; ++k, ++i)
    if (!is_digit(s[i]))
      return 0;
  if (s[i] != '-')
    return 0;
  ++i;
  std::size_t digits_start = i;
  while (i < s.size() && is_digit(s[i]))
    ++i;
  if (i - digits_start < 4 || (i < s.size() && is_alnum(s[i])))
    return 0;
  return i - pos;
}

struct TokenStats {
  std::size_t count = 0;
  std::size_t first = 0;
  bool exempt = false;
};

std::string require_string(const json& doc, const char* field) {
  auto it = doc.find(field);
  if (it == doc.end() || !it->is_string())
    throw Error(ErrorCode::SchemaViolation, field);
  return it->get<std::string>();
}

std::vector<std::string> string_list(const json& doc, const char* field,
                                     const char* object_key = nullptr) {
  std::vector<std::string> out;
  auto it = doc.find(field);
  if (it == doc.end() || it->is_null())
    return out;
  if (!it->is_array())
    throw Error(ErrorCode::SchemaViolation, field);
  for (const auto& item : *it) {
    if (item.is_string()) {
      out.push_back(item.get<std::string>());
    } else if (object_key && item.is_object() && item.contains(object_key) &&
               (*item.find(object_key)).is_string()) {
      out.push_back(item[object_key].get<std::string>());
    } else {
      throw Error(ErrorCode::SchemaViolation, field);
    }
  }
  return out;
}

std::string read_description(const json& doc) {
  if (auto it = doc.find("description"); it != doc.end()) {
    if (!it->is_string())
      throw Error(ErrorCode::SchemaViolation, "description");
    return it->get<std::string>();
  }
  auto it = doc.find("descriptions");
  if (it == doc.end() || !it->is_array() || it->empty())
    throw Error(ErrorCode::SchemaViolation, "description");
  const json* chosen = nullptr;
  for (const auto& d : *it) {
    if (!d.is_object() || !d.contains("value") || !d["value"].is_string())
      throw Error(ErrorCode::SchemaViolation, "descriptions");
    if (!chosen || (d.value("lang", "") == "en" &&
                    (*chosen).value("lang", "") != "en"))
      chosen = &d;
  }
  return (*chosen)["value"].get<std::string>();
}

std::optional<std::string> optional_string(const json& doc, const char* field) {
  auto it = doc.find(field);
  if (it == doc.end() || it->is_null())
    return std::nullopt;
  if (!it->is_string())
    throw Error(ErrorCode::SchemaViolation, field);
  return it->get<std::string>();
}

std::string regex_escape(std::string_view s) {
  static constexpr std::string_view special = R"(\^$.|?*+()[]{})";
  std::string out;
  for (char c : s) {
    if (special.find(c) != std::string_view::npos)
      out += '\\';
    out += c;
  }
  return out;
}

} // namespace

bool is_cve_id(std::string_view id) {
  return id.size() >= 13 && id.substr(0, 4) == "CVE-" &&
         cve_id_length(id, 0) == id.size();
}

StopwordSet parse_stopwords(std::string_view content) {
  StopwordSet words;
  for (const auto& line : text::split_lines(content)) {
    auto token = text::trim(line);
    if (token.empty() || token.front() == '#')
      continue;
    words.insert(text::to_lower(token));
  }
  return words;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  return parse_stopwords(text::read_file(path));
}

std::vector<std::string> extract_keywords(std::string_view description,
                                          const StopwordSet& stopwords) {
  std::map<std::string, TokenStats, std::less<>> stats;
  std::size_t ordinal = 0;
  auto record = [&](std::string token, bool exempt) {
    auto [it, inserted] = stats.try_emplace(std::move(token));
    if (inserted)
      it->second.first = ordinal;
    ++it->second.count;
    it->second.exempt = it->second.exempt || exempt;
    ++ordinal;
  };

  std::size_t i = 0;
  while (i < description.size()) {
    if (!is_alnum(description[i])) {
      ++i;
      continue;
    }
    if (std::size_t len = cve_id_length(description, i); len > 0) {
      record("cve", true);
      record(text::to_lower(description.substr(i, len)), true);
      i += len;
      continue;
    }
    std::size_t start = i;
    while (i < description.size() && is_alnum(description[i]))
      ++i;
    record(text::to_lower(description.substr(start, i - start)), false);
  }

  struct Ranked {
    std::string token;
    TokenStats stats;
  };
  std::vector<Ranked> ranked;
  for (auto& [token, s] : stats) {
    if (!s.exempt && stopwords.contains(token))
      continue;
    ranked.push_back({token, s});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.stats.count != b.stats.count)
      return a.stats.count > b.stats.count;
    return a.stats.first < b.stats.first;
  });
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (auto& r : ranked)
    out.push_back(std::move(r.token));
  return out;
}

CveDescriptor parse_cve(std::string_view document,
                        const StopwordSet& stopwords) {
  json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw Error(ErrorCode::SchemaViolation, "document is not a JSON object");
  if (!doc.contains("id") && doc.contains("cve") && doc["cve"].is_object())
    doc = doc["cve"];

  CveDescriptor cve;
  cve.id = require_string(doc, "id");
  if (!is_cve_id(cve.id))
    throw Error(ErrorCode::BadCveId, cve.id);
  auto published = parse_timestamp(require_string(doc, "published"));
  if (!published)
    throw Error(ErrorCode::SchemaViolation, "published");
  cve.published = *published;
  cve.description = read_description(doc);
  cve.reference_links = string_list(doc, "references", "url");
  cve.affected_language = require_string(doc, "affected_language");
  if (cve.affected_language.empty())
    throw Error(ErrorCode::SchemaViolation, "affected_language");
  cve.affected_projects = string_list(doc, "affected_projects");
  if (auto it = doc.find("protocol_level"); it != doc.end() && !it->is_null()) {
    if (!it->is_boolean())
      throw Error(ErrorCode::SchemaViolation, "protocol_level");
    cve.code_specific = !it->get<bool>();
  }
  cve.introduced_version = optional_string(doc, "introduced_version");
  cve.fixed_version = optional_string(doc, "fixed_version");
  cve.keywords = extract_keywords(cve.description, stopwords);
  return cve;
}

CveDescriptor load_cve(const std::filesystem::path& path,
                       const StopwordSet& stopwords) {
  return parse_cve(text::read_file(path), stopwords);
}

std::string build_issue_query(const CveDescriptor& cve, std::size_t top_k) {
  std::string pattern = regex_escape(cve.id) + "|CVE";
  const std::string id_lower = text::to_lower(cve.id);
  std::size_t taken = 0;
  for (const auto& keyword : cve.keywords) {
    if (taken == top_k)
      break;
    if (keyword == "cve" || keyword == id_lower)
      continue;
    pattern += '|';
    pattern += regex_escape(keyword);
    ++taken;
  }
  return pattern;
}

} // namespace clonewatch
