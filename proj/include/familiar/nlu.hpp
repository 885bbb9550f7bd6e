#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace familiar {

/// An intent recognized by token templates such as "learn the region {region_label}".
struct IntentDef {
  std::string name;
  std::vector<std::string> patterns;
  std::vector<std::string> slots;
  std::string example;
  bool operator==(const IntentDef&) const = default;
};

struct ParseResult {
  bool recognized = false;
  std::string intent;                        // recognized only
  std::map<std::string, std::string> slots;  // recognized only
  std::string normalized;

  bool operator==(const ParseResult&) const = default;
};

/// Lowercase, trim, collapse inner whitespace, drop trailing `.?!`.
std::string normalize(std::string_view text);

/// Slot names referenced by `{...}` markers in `pattern`, in order.
std::vector<std::string> pattern_slots(std::string_view pattern);

/// First intent (catalogue order) with a pattern (definition order) matching
/// the whole normalized utterance wins.
ParseResult parse_utterance(std::string_view text, std::span<const IntentDef> catalogue);

}  // namespace familiar
