// Minimal sectioned key-value config reader (TOML-like subset): [section],
// repeatable [[section]], `key = value` with numbers, booleans, quoted
// strings and numeric arrays, # comments. Syntax errors carry line/column.
#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

#include "gravem/errors.hpp"
#include "gravem/linalg.hpp"

namespace gravem::config {

struct Value {
  enum class Kind { Number, Boolean, String, NumberArray } kind = Kind::Number;
  Real number = 0.0;
  bool boolean = false;
  std::string text;
  std::vector<Real> array;
};

struct Entry {
  std::string key;
  Value value;
  int line = 0;
};

struct Section {
  std::string name;
  bool repeated = false;  // declared as [[name]]
  int line = 0;
  std::vector<Entry> entries;

  const Entry* find(const std::string& key) const {
    for (const auto& e : entries)
      if (e.key == key) return &e;
    return nullptr;
  }
};

namespace detail {

struct Cursor {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;
  int col = 1;

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char take() {
    const char c = text[pos++];
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    return c;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError("line " + std::to_string(line) + ", col " + std::to_string(col) + ": " +
                      msg);
  }
};

inline void skip_inline_ws(Cursor& c) {
  while (!c.eof() && (c.peek() == ' ' || c.peek() == '\t' || c.peek() == '\r')) c.take();
}

inline void skip_ws_and_comments(Cursor& c) {
  while (!c.eof()) {
    const char ch = c.peek();
    if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
      c.take();
    } else if (ch == '#') {
      while (!c.eof() && c.peek() != '\n') c.take();
    } else {
      break;
    }
  }
}

inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

inline std::string read_ident(Cursor& c) {
  std::string out;
  while (!c.eof() && ident_char(c.peek())) out.push_back(c.take());
  if (out.empty()) c.fail("expected an identifier");
  return out;
}

inline Real read_number(Cursor& c) {
  std::string tok;
  while (!c.eof()) {
    const char ch = c.peek();
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '+' || ch == '-' || ch == '.' ||
        ch == 'e' || ch == 'E') {
      tok.push_back(c.take());
    } else {
      break;
    }
  }
  if (tok.empty()) c.fail("expected a number");
  std::size_t used = 0;
  Real v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    c.fail("malformed number '" + tok + "'");
  }
  if (used != tok.size()) c.fail("malformed number '" + tok + "'");
  return v;
}

inline Value read_value(Cursor& c) {
  skip_inline_ws(c);
  if (c.eof()) c.fail("expected a value");
  Value v;
  const char ch = c.peek();
  if (ch == '"') {
    c.take();
    v.kind = Value::Kind::String;
    while (!c.eof() && c.peek() != '"') {
      if (c.peek() == '\n') c.fail("unterminated string");
      v.text.push_back(c.take());
    }
    if (c.eof()) c.fail("unterminated string");
    c.take();
    return v;
  }
  if (ch == '[') {
    c.take();
    v.kind = Value::Kind::NumberArray;
    skip_ws_and_comments(c);
    if (!c.eof() && c.peek() == ']') {
      c.take();
      return v;
    }
    while (true) {
      skip_ws_and_comments(c);
      v.array.push_back(read_number(c));
      skip_ws_and_comments(c);
      if (c.eof()) c.fail("unterminated array");
      const char d = c.take();
      if (d == ']') break;
      if (d != ',') c.fail("expected ',' or ']' in array");
    }
    return v;
  }
  if (std::isalpha(static_cast<unsigned char>(ch))) {
    const std::string word = read_ident(c);
    if (word == "true" || word == "false") {
      v.kind = Value::Kind::Boolean;
      v.boolean = (word == "true");
      return v;
    }
    c.fail("unexpected token '" + word + "' (strings must be quoted)");
  }
  v.kind = Value::Kind::Number;
  v.number = read_number(c);
  return v;
}

}  // namespace detail

inline std::vector<Section> parse(const std::string& text) {
  detail::Cursor c{text};
  std::vector<Section> sections;
  Section* current = nullptr;
  detail::skip_ws_and_comments(c);
  while (!c.eof()) {
    if (c.peek() == '[') {
      c.take();
      bool repeated = false;
      if (!c.eof() && c.peek() == '[') {
        c.take();
        repeated = true;
      }
      detail::skip_inline_ws(c);
      Section s;
      s.line = c.line;
      s.repeated = repeated;
      s.name = detail::read_ident(c);
      detail::skip_inline_ws(c);
      if (c.eof() || c.take() != ']') c.fail("expected ']' after section name");
      if (repeated) {
        if (c.eof() || c.take() != ']') c.fail("expected ']]' after section name");
      }
      sections.push_back(std::move(s));
      current = &sections.back();
    } else {
      Entry e;
      e.line = c.line;
      e.key = detail::read_ident(c);
      detail::skip_inline_ws(c);
      if (c.eof() || c.take() != '=') c.fail("expected '=' after key '" + e.key + "'");
      e.value = detail::read_value(c);
      if (!current)
        throw SyntaxError("line " + std::to_string(e.line) +
                          ", col 1: key '" + e.key + "' appears before any [section]");
      for (const auto& prev : current->entries)
        if (prev.key == e.key)
          throw SyntaxError("line " + std::to_string(e.line) + ", col 1: duplicate key '" +
                            e.key + "' in section [" + current->name + "]");
      current->entries.push_back(std::move(e));
    }
    detail::skip_ws_and_comments(c);
  }
  return sections;
}

// Edit distance for "did you mean" suggestions on unknown keys.
inline int edit_distance(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::string suggest(const std::string& got, const std::vector<std::string>& known) {
  std::string best;
  int best_d = 3;  // suggest only close misses
  for (const auto& k : known) {
    const int d = edit_distance(got, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

}  // namespace gravem::config
