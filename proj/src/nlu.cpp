#include "familiar/nlu.hpp"

#include <cctype>
#include <optional>
#include <sstream>

namespace familiar {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<std::string> split_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (is_space(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool is_slot_token(const std::string& tok) {
  return tok.size() > 2 && tok.front() == '{' && tok.back() == '}';
}

using Captures = std::map<std::string, std::string>;

bool match_from(const std::vector<std::string>& pat, std::size_t pi,
                const std::vector<std::string>& words, std::size_t wi, Captures& caps) {
  if (pi == pat.size()) return wi == words.size();
  const auto& tok = pat[pi];
  if (!is_slot_token(tok)) {
    return wi < words.size() && words[wi] == tok && match_from(pat, pi + 1, words, wi + 1, caps);
  }
  // Maximal run first; at least one token.
  for (std::size_t end = words.size(); end > wi; --end) {
    Captures attempt = caps;
    if (!match_from(pat, pi + 1, words, end, attempt)) continue;
    std::string value;
    for (std::size_t i = wi; i < end; ++i) {
      if (i > wi) value += ' ';
      value += words[i];
    }
    attempt[tok.substr(1, tok.size() - 2)] = std::move(value);
    caps = std::move(attempt);
    return true;
  }
  return false;
}

}  // namespace

std::string normalize(std::string_view text) {
  std::string lowered;
  lowered.reserve(text.size());
  for (char c : text) lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

  std::string out;
  for (const auto& tok : split_tokens(lowered)) {
    if (!out.empty()) out += ' ';
    out += tok;
  }
  while (!out.empty() && (out.back() == '.' || out.back() == '?' || out.back() == '!' ||
                          is_space(out.back()))) {
    out.pop_back();
  }
  return out;
}

std::vector<std::string> pattern_slots(std::string_view pattern) {
  std::vector<std::string> out;
  for (const auto& tok : split_tokens(pattern))
    if (is_slot_token(tok)) out.push_back(tok.substr(1, tok.size() - 2));
  return out;
}

ParseResult parse_utterance(std::string_view text, std::span<const IntentDef> catalogue) {
  ParseResult res;
  res.normalized = normalize(text);
  const auto words = split_tokens(res.normalized);
  if (words.empty()) return res;

  for (const auto& intent : catalogue) {
    for (const auto& pattern : intent.patterns) {
      const auto pat = split_tokens(normalize(pattern));
      Captures caps;
      if (match_from(pat, 0, words, 0, caps)) {
        res.recognized = true;
        res.intent = intent.name;
        res.slots = std::move(caps);
        return res;
      }
    }
  }
  return res;
}

}  // namespace familiar
