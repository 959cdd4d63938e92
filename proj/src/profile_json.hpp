#pragma once

#include "clonewatch/clonedetect.hpp"
#include "clonewatch/error.hpp"

#include <json.hpp>

namespace clonewatch::detail {

inline nlohmann::json profile_to_json(const NormalizationProfile& p) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& [open, close] : p.block_comment_delims)
    blocks.push_back({open, close});
  return {{"line_comment_markers", p.line_comment_markers},
          {"block_comment_delims", blocks},
          {"collapse_internal_whitespace", p.collapse_internal_whitespace},
          {"drop_blank_lines", p.drop_blank_lines},
          {"quote_chars", p.quote_chars}};
}

// Fields missing from j keep their value in base.
inline NormalizationProfile profile_from_json(const nlohmann::json& j,
                                              NormalizationProfile base = {}) {
  if (!j.is_object())
    throw Error(ErrorCode::SchemaViolation, "profile");
  try {
    if (j.contains("line_comment_markers"))
      base.line_comment_markers =
          j["line_comment_markers"].get<std::vector<std::string>>();
    if (j.contains("block_comment_delims")) {
      base.block_comment_delims.clear();
      for (const auto& pair : j["block_comment_delims"]) {
        if (!pair.is_array() || pair.size() != 2)
          throw Error(ErrorCode::SchemaViolation, "profile.block_comment_delims");
        base.block_comment_delims.emplace_back(pair[0].get<std::string>(),
                                               pair[1].get<std::string>());
      }
    }
    if (j.contains("collapse_internal_whitespace"))
      base.collapse_internal_whitespace =
          j["collapse_internal_whitespace"].get<bool>();
    if (j.contains("drop_blank_lines"))
      base.drop_blank_lines = j["drop_blank_lines"].get<bool>();
    if (j.contains("quote_chars"))
      base.quote_chars = j["quote_chars"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("profile: ") + e.what());
  }
  try {
    base.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaViolation, e.detail());
  }
  return base;
}

} // namespace clonewatch::detail
