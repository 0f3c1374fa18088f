#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "duphist/core/errors.hpp"

namespace duphist::io_detail {

struct Line {
  int number = 0;
  std::string_view text;
  std::vector<std::string_view> fields;

  int column(std::size_t i) const { return static_cast<int>(fields[i].data() - text.data()) + 1; }
};

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t at = line.find(sep, pos);
    if (at == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, at - pos));
    pos = at + 1;
  }
}

// Non-empty lines split on tabs; comment lines kept when keep_comments.
inline std::vector<Line> tab_lines(std::string_view text, bool keep_comments = false) {
  std::vector<Line> out;
  int n = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++n;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || (!keep_comments && line.front() == '#')) continue;
    out.push_back({n, line, split(line, '\t')});
  }
  return out;
}

template <class T>
T number(const Line& l, std::size_t i, const char* what) {
  if (i >= l.fields.size()) throw ParseError(std::string("missing ") + what, l.number, static_cast<int>(l.text.size()) + 1);
  std::string_view s = l.fields[i];
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
    throw ParseError(std::string("bad ") + what + " '" + std::string(s) + "'", l.number, l.column(i));
  }
  return v;
}

inline void expect_fields(const Line& l, std::size_t n) {
  if (l.fields.size() != n) {
    throw ParseError("expected " + std::to_string(n) + " tab-separated columns, got " + std::to_string(l.fields.size()),
                     l.number, 1);
  }
}

}  // namespace duphist::io_detail
