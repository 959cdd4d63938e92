#include "clonewatch/report.hpp"

#include "clonewatch/error.hpp"
#include "clonewatch/text.hpp"

#include <expat.h>

#include <charconv>
#include <memory>
#include <regex>

namespace clonewatch {

namespace {

// Text safe for XML 1.0: valid UTF-8 without disallowed control characters.
std::string xml_clean(std::string s) {
  text::sanitize_utf8(s);
  for (auto& c : s) {
    auto u = static_cast<unsigned char>(c);
    if (u < 0x20 && c != '\t' && c != '\n' && c != '\r')
      c = '?';
  }
  return s;
}

std::string escape(std::string_view raw, bool attribute) {
  std::string s = xml_clean(std::string(raw));
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"':
      out += attribute ? "&quot;" : "\"";
      break;
    case '\n':
      out += attribute ? "&#10;" : "\n";
      break;
    case '\r': out += "&#13;"; break;
    case '\t':
      out += attribute ? "&#9;" : "\t";
      break;
    default: out += c;
    }
  }
  return out;
}

std::string attr(std::string_view name, std::string_view value) {
  return " " + std::string(name) + "=\"" + escape(value, true) + "\"";
}

void render_block(std::string& out, const CloneMatch& m, std::string_view kind) {
  out += "    <block" + attr("kind", kind) +
         attr("snippet", std::to_string(m.snippet_index)) +
         attr("sourceFile", m.source_file) +
         attr("startLineNumber", std::to_string(m.start_line)) +
         attr("endLineNumber", std::to_string(m.end_line)) +
         attr("lineCount", std::to_string(m.line_count)) + "/>\n";
}

// ---------------------------------------------------------------------------
// Minimal element tree built with expat.

struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<std::unique_ptr<Element>> children;
  std::string text;
  long line = 0;

  const std::string* find_attr(std::string_view key) const {
    for (const auto& [k, v] : attributes)
      if (k == key)
        return &v;
    return nullptr;
  }
};

struct TreeBuilder {
  std::unique_ptr<Element> root;
  std::vector<Element*> stack;
  XML_Parser parser = nullptr;

  static void on_start(void* data, const XML_Char* name, const XML_Char** atts) {
    auto* self = static_cast<TreeBuilder*>(data);
    auto element = std::make_unique<Element>();
    element->name = name;
    element->line = XML_GetCurrentLineNumber(self->parser);
    for (int i = 0; atts[i]; i += 2)
      element->attributes.emplace_back(atts[i], atts[i + 1]);
    Element* raw = element.get();
    if (self->stack.empty())
      self->root = std::move(element);
    else
      self->stack.back()->children.push_back(std::move(element));
    self->stack.push_back(raw);
  }
  static void on_end(void* data, const XML_Char*) {
    static_cast<TreeBuilder*>(data)->stack.pop_back();
  }
  static void on_text(void* data, const XML_Char* s, int len) {
    auto* self = static_cast<TreeBuilder*>(data);
    if (!self->stack.empty())
      self->stack.back()->text.append(s, static_cast<std::size_t>(len));
  }
};

std::unique_ptr<Element> parse_tree(std::string_view document) {
  TreeBuilder builder;
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)>
      parser(XML_ParserCreate("UTF-8"), &XML_ParserFree);
  if (!parser)
    throw Error(ErrorCode::Io, "cannot create XML parser");
  builder.parser = parser.get();
  XML_SetUserData(parser.get(), &builder);
  XML_SetElementHandler(parser.get(), &TreeBuilder::on_start,
                        &TreeBuilder::on_end);
  XML_SetCharacterDataHandler(parser.get(), &TreeBuilder::on_text);
  if (XML_Parse(parser.get(), document.data(), static_cast<int>(document.size()),
                XML_TRUE) == XML_STATUS_ERROR) {
    throw Error(ErrorCode::SchemaViolation,
                "line " + std::to_string(XML_GetCurrentLineNumber(parser.get())) +
                    ": " + XML_ErrorString(XML_GetErrorCode(parser.get())));
  }
  if (!builder.root)
    throw Error(ErrorCode::SchemaViolation, "empty document");
  return std::move(builder.root);
}

bool parse_unsigned(const std::string& s, std::size_t& out) {
  if (s.empty())
    return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::chrono::nanoseconds parse_seconds(const std::string& s) {
  static const std::regex pattern(R"((\d+)\.(\d{3}))");
  std::smatch m;
  if (!std::regex_match(s, m, pattern))
    throw Error(ErrorCode::SchemaViolation, "processingTime '" + s + "'");
  return std::chrono::seconds{std::stoll(m[1].str())} +
         std::chrono::milliseconds{std::stoll(m[2].str())};
}

// Collects schema violations for one element tree.
class Validator {
public:
  std::vector<std::string> problems;

  void validate_root(const Element& root) {
    if (root.name != "clonewatch") {
      fail(root, "root element must be <clonewatch>");
      return;
    }
    allow_attributes(root, {"cve", "timestamp", "version", "corpusSize",
                            "filteredCount"});
    static const std::regex cve(R"(CVE-\d{4}-\d{4,})");
    if (auto v = required(root, "cve"); v && !std::regex_match(*v, cve))
      fail(root, "cve does not match CVE-YYYY-NNNN");
    if (auto v = required(root, "timestamp"); v && !parse_timestamp(*v))
      fail(root, "timestamp is not an RFC 3339 date-time");
    required(root, "version");
    std::size_t corpus = 0, filtered = 0;
    bool have_corpus = unsigned_attr(root, "corpusSize", corpus, false);
    bool have_filtered = unsigned_attr(root, "filteredCount", filtered, false);
    if (have_corpus && have_filtered && filtered > corpus)
      fail(root, "filteredCount exceeds corpusSize");

    bool projects_started = false;
    bool settings_seen = false;
    const std::string* previous_name = nullptr;
    for (const auto& child : root.children) {
      if (child->name == "settings") {
        if (projects_started || settings_seen)
          fail(*child, "<settings> must appear once, before any <project>");
        settings_seen = true;
        validate_settings(*child);
      } else if (child->name == "project") {
        projects_started = true;
        validate_project(*child);
        const std::string* name = child->find_attr("name");
        if (name && previous_name && !(*previous_name < *name))
          fail(*child, "projects are not strictly ordered by name");
        if (name)
          previous_name = name;
      } else {
        fail(*child, "unexpected element <" + child->name + ">");
      }
    }
  }

private:
  void fail(const Element& e, const std::string& message) {
    problems.push_back("line " + std::to_string(e.line) + ": " + message);
  }

  const std::string* required(const Element& e, std::string_view name) {
    const std::string* v = e.find_attr(name);
    if (!v)
      fail(e, "<" + e.name + "> missing attribute " + std::string(name));
    return v;
  }

  void allow_attributes(const Element& e,
                        std::initializer_list<std::string_view> allowed) {
    for (const auto& [k, v] : e.attributes)
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
        fail(e, "<" + e.name + "> has unexpected attribute " + k);
  }

  bool unsigned_attr(const Element& e, std::string_view name, std::size_t& out,
                     bool positive) {
    const std::string* v = required(e, name);
    if (!v)
      return false;
    if (!parse_unsigned(*v, out) || (positive && out == 0)) {
      fail(e, std::string(name) + " must be a " +
                  (positive ? "positive" : "non-negative") + " integer");
      return false;
    }
    return true;
  }

  void no_text(const Element& e) {
    if (!text::trim(e.text).empty())
      fail(e, "<" + e.name + "> must not contain text");
  }

  void validate_settings(const Element& settings) {
    no_text(settings);
    if (!settings.attributes.empty())
      fail(settings, "<settings> takes no attributes");
    for (const auto& s : settings.children) {
      if (s->name != "setting") {
        fail(*s, "unexpected element <" + s->name + "> in <settings>");
        continue;
      }
      allow_attributes(*s, {"name", "value"});
      required(*s, "name");
      required(*s, "value");
      if (!s->children.empty() || !s->text.empty())
        fail(*s, "<setting> must be empty");
    }
  }

  void validate_project(const Element& p) {
    no_text(p);
    allow_attributes(p, {"name", "status", "processingTime"});
    if (auto name = required(p, "name"); name && name->empty())
      fail(p, "project name is empty");
    std::optional<VerdictStatus> status;
    if (auto s = required(p, "status")) {
      try {
        status = verdict_status_from_string(*s);
      } catch (const Error&) {
        fail(p, "unknown status '" + *s + "'");
      }
    }
    static const std::regex seconds(R"(\d+\.\d{3})");
    if (auto t = required(p, "processingTime"); t && !std::regex_match(*t, seconds))
      fail(p, "processingTime must have exactly three decimals");

    // Content model: block*, diagnostic?, warning*
    int phase = 0;
    std::size_t vuln_blocks = 0, fix_blocks = 0;
    bool has_diagnostic = false;
    for (const auto& c : p.children) {
      if (c->name == "block") {
        if (phase > 0)
          fail(*c, "<block> after <diagnostic>/<warning>");
        const std::string* kind = c->find_attr("kind");
        validate_block(*c);
        if (kind && *kind == "vulnerable")
          ++vuln_blocks;
        else if (kind && *kind == "fix")
          ++fix_blocks;
      } else if (c->name == "diagnostic") {
        if (phase > 0)
          fail(*c, "<diagnostic> out of order or repeated");
        phase = 1;
        has_diagnostic = true;
        if (!c->children.empty() || !c->attributes.empty())
          fail(*c, "<diagnostic> holds text only");
      } else if (c->name == "warning") {
        phase = 2;
        if (!c->children.empty() || !c->attributes.empty())
          fail(*c, "<warning> holds text only");
      } else {
        fail(*c, "unexpected element <" + c->name + "> in <project>");
      }
    }
    if (!status)
      return;
    switch (*status) {
    case VerdictStatus::Vulnerable:
      if (vuln_blocks == 0 || fix_blocks != 0)
        fail(p, "VULNERABLE needs vulnerable blocks and no fix blocks");
      break;
    case VerdictStatus::Fixed:
      if (fix_blocks == 0)
        fail(p, "FIXED needs at least one fix block");
      break;
    case VerdictStatus::NotAffected:
      if (vuln_blocks + fix_blocks != 0)
        fail(p, "NOT_AFFECTED must not carry blocks");
      break;
    case VerdictStatus::FilteredOut:
    case VerdictStatus::Error:
      if (vuln_blocks + fix_blocks != 0)
        fail(p, std::string(to_string(*status)) + " must not carry blocks");
      if (*status == VerdictStatus::Error && !has_diagnostic)
        fail(p, "ERROR needs a <diagnostic>");
      break;
    }
  }

  void validate_block(const Element& b) {
    allow_attributes(b, {"kind", "snippet", "sourceFile", "startLineNumber",
                         "endLineNumber", "lineCount"});
    if (!b.children.empty() || !b.text.empty())
      fail(b, "<block> must be empty");
    if (auto kind = required(b, "kind");
        kind && *kind != "vulnerable" && *kind != "fix")
      fail(b, "kind must be 'vulnerable' or 'fix'");
    std::size_t snippet = 0, start = 0, end = 0, count = 0;
    unsigned_attr(b, "snippet", snippet, false);
    required(b, "sourceFile");
    bool ok = unsigned_attr(b, "startLineNumber", start, true);
    ok = unsigned_attr(b, "endLineNumber", end, true) && ok;
    ok = unsigned_attr(b, "lineCount", count, true) && ok;
    if (ok && end < start)
      fail(b, "endLineNumber before startLineNumber");
    if (ok && count > end - start + 1)
      fail(b, "lineCount exceeds the line span");
  }
};

CloneMatch block_from(const Element& b) {
  CloneMatch m;
  m.source_file = *b.find_attr("sourceFile");
  parse_unsigned(*b.find_attr("startLineNumber"), m.start_line);
  parse_unsigned(*b.find_attr("endLineNumber"), m.end_line);
  parse_unsigned(*b.find_attr("lineCount"), m.line_count);
  parse_unsigned(*b.find_attr("snippet"), m.snippet_index);
  return m;
}

} // namespace

std::string render_xml(const ScanReport& report) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<clonewatch" + attr("cve", report.cve_id) +
         attr("timestamp", format_timestamp(report.scan_timestamp)) +
         attr("version", report.tool_version) +
         attr("corpusSize", std::to_string(report.corpus_size)) +
         attr("filteredCount", std::to_string(report.filtered_count)) + ">\n";
  if (!report.settings.empty()) {
    out += "  <settings>\n";
    for (const auto& [name, value] : report.settings)
      out += "    <setting" + attr("name", name) + attr("value", value) + "/>\n";
    out += "  </settings>\n";
  }
  for (const auto& v : report.verdicts) {
    out += "  <project" + attr("name", v.project) +
           attr("status", to_string(v.status)) +
           attr("processingTime", format_processing_time(v.elapsed));
    if (v.vuln_matches.empty() && v.fix_matches.empty() &&
        v.diagnostic.empty() && v.warnings.empty()) {
      out += "/>\n";
      continue;
    }
    out += ">\n";
    for (const auto& m : v.vuln_matches)
      render_block(out, m, "vulnerable");
    for (const auto& m : v.fix_matches)
      render_block(out, m, "fix");
    if (!v.diagnostic.empty())
      out += "    <diagnostic>" + escape(v.diagnostic, false) + "</diagnostic>\n";
    for (const auto& w : v.warnings)
      out += "    <warning>" + escape(w, false) + "</warning>\n";
    out += "  </project>\n";
  }
  out += "</clonewatch>\n";
  return out;
}

void emit_xml(const ScanReport& report, const std::filesystem::path& path) {
  text::write_file(path, render_xml(report));
}

std::vector<std::string> validate_xml(std::string_view document) {
  std::unique_ptr<Element> root;
  try {
    root = parse_tree(document);
  } catch (const Error& e) {
    return {"not well-formed: " + e.detail()};
  }
  Validator v;
  v.validate_root(*root);
  return v.problems;
}

ScanReport parse_xml(std::string_view document) {
  auto problems = validate_xml(document);
  if (!problems.empty())
    throw Error(ErrorCode::SchemaViolation, problems.front());
  auto root = parse_tree(document);

  ScanReport r;
  r.cve_id = *root->find_attr("cve");
  r.scan_timestamp = *parse_timestamp(*root->find_attr("timestamp"));
  r.tool_version = *root->find_attr("version");
  parse_unsigned(*root->find_attr("corpusSize"), r.corpus_size);
  parse_unsigned(*root->find_attr("filteredCount"), r.filtered_count);
  for (const auto& child : root->children) {
    if (child->name == "settings") {
      for (const auto& s : child->children)
        r.settings.emplace_back(*s->find_attr("name"), *s->find_attr("value"));
      continue;
    }
    ProjectVerdict v;
    v.project = *child->find_attr("name");
    v.status = verdict_status_from_string(*child->find_attr("status"));
    v.elapsed = parse_seconds(*child->find_attr("processingTime"));
    for (const auto& c : child->children) {
      if (c->name == "block") {
        auto m = block_from(*c);
        (*c->find_attr("kind") == "vulnerable" ? v.vuln_matches : v.fix_matches)
            .push_back(std::move(m));
      } else if (c->name == "diagnostic") {
        v.diagnostic = c->text;
      } else if (c->name == "warning") {
        v.warnings.push_back(c->text);
      }
    }
    r.verdicts.push_back(std::move(v));
  }
  return r;
}

} // namespace clonewatch
