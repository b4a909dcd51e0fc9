#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "semidx/error.hpp"

namespace semidx::detail {

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

// Reads a double-quoted string starting at `pos`; advances past it.
inline std::string read_quoted(std::string_view text, std::size_t& pos) {
  if (pos >= text.size() || text[pos] != '"') throw ParseError("expected '\"'", pos);
  ++pos;
  std::string out;
  while (pos < text.size()) {
    char c = text[pos++];
    if (c == '\\' && pos < text.size()) {
      out += text[pos++];
    } else if (c == '"') {
      return out;
    } else {
      out += c;
    }
  }
  throw ParseError("unterminated string", pos);
}

inline void skip_spaces(std::string_view text, std::size_t& pos) {
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace semidx::detail
