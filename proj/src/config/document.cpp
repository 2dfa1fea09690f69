#include "dedem/config/document.hpp"

#include <cctype>
#include <charconv>

namespace dedem::config {

const Value* Section::find(std::string_view key) const {
  for (const auto& e : entries) {
    if (e.key == key) return &e.value;
  }
  return nullptr;
}

const Section* Document::find(std::string_view name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

namespace {

class DocumentParser {
 public:
  explicit DocumentParser(std::string_view text) : text_(text) {}

  Document run() {
    Document doc;
    Section* current = &doc.root;
    for (;;) {
      skip_blank_lines();
      if (eof()) break;
      const char c = peek();
      if (c == '[') {
        const std::size_t line = line_;
        const std::size_t col = col_;
        advance();
        skip_inline_space();
        std::string name;
        while (!eof() && peek() != ']' && peek() != '\n') name += advance();
        while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) {
          name.pop_back();
        }
        if (eof() || peek() != ']') fail("unterminated section header", line, col);
        advance();
        if (name.empty()) fail("empty section name", line, col);
        for (char ch : name) {
          if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.' ||
                ch == '-')) {
            fail("invalid character in section name '" + name + "'", line, col);
          }
        }
        if (doc.find(name) != nullptr) fail("duplicate section [" + name + "]", line, col);
        end_of_line();
        doc.sections.push_back(Section{name, line, {}});
        current = &doc.sections.back();
        continue;
      }
      parse_entry(*current);
    }
    return doc;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::size_t line, std::size_t col) const {
    throw ParseError(msg, line, col);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail(msg, line_, col_); }

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  char advance() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_inline_space() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
  }

  void skip_comment() {
    if (!eof() && peek() == '#') {
      while (!eof() && peek() != '\n') advance();
    }
  }

  // Whitespace, newlines and comments; used inside arrays and between lines.
  void skip_blank_lines() {
    for (;;) {
      skip_inline_space();
      if (eof()) return;
      if (peek() == '#') {
        skip_comment();
      } else if (peek() == '\n') {
        advance();
      } else {
        return;
      }
    }
  }

  void end_of_line() {
    skip_inline_space();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n') fail(std::string("unexpected '") + peek() + "' after value");
    advance();
  }

  void parse_entry(Section& section) {
    const std::size_t line = line_;
    const std::size_t col = col_;
    std::string key;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
      key += advance();
    }
    if (key.empty()) fail(std::string("expected key, found '") + peek() + "'");
    skip_inline_space();
    if (eof() || peek() != '=') fail("expected '=' after key '" + key + "'");
    advance();
    skip_inline_space();
    Value v = parse_value();
    if (section.find(key) != nullptr) {
      fail("duplicate key '" + key + "'" +
               (section.name.empty() ? std::string() : " in [" + section.name + "]"),
           line, col);
    }
    section.entries.push_back(Entry{key, std::move(v)});
    end_of_line();
  }

  Value parse_value() {
    Value v;
    v.line = line_;
    v.column = col_;
    if (eof() || peek() == '\n') fail("missing value");
    const char c = peek();
    if (c == '"') {
      advance();
      std::string s;
      while (!eof() && peek() != '"') {
        if (peek() == '\n') fail("unterminated string", v.line, v.column);
        char ch = advance();
        if (ch == '\\' && !eof()) {
          const char esc = advance();
          switch (esc) {
            case 'n': ch = '\n'; break;
            case 't': ch = '\t'; break;
            default: ch = esc; break;
          }
        }
        s += ch;
      }
      if (eof()) fail("unterminated string", v.line, v.column);
      advance();
      v.data = std::move(s);
      return v;
    }
    if (c == '[') {
      advance();
      Value::Array items;
      skip_blank_lines();
      if (!eof() && peek() == ']') {
        advance();
        v.data = std::move(items);
        return v;
      }
      for (;;) {
        skip_blank_lines();
        items.push_back(parse_value());
        skip_blank_lines();
        if (eof()) fail("unterminated array", v.line, v.column);
        if (peek() == ',') {
          advance();
          skip_blank_lines();
          if (!eof() && peek() == ']') {
            advance();
            break;
          }
          continue;
        }
        if (peek() == ']') {
          advance();
          break;
        }
        fail(std::string("expected ',' or ']' in array, found '") + peek() + "'");
      }
      v.data = std::move(items);
      return v;
    }
    std::string word;
    while (!eof() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' &&
           peek() != ']' && peek() != '#') {
      word += advance();
    }
    if (word == "true" || word == "false") {
      v.data = (word == "true");
      return v;
    }
    double d = 0.0;
    const char* first = word.data();
    if (!word.empty() && word.front() == '+') ++first;
    const auto res = std::from_chars(first, word.data() + word.size(), d);
    if (word.empty() || res.ec != std::errc() || res.ptr != word.data() + word.size()) {
      fail("invalid value '" + word + "'", v.line, v.column);
    }
    v.data = d;
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

}  // namespace

Document parse_document(std::string_view text) { return DocumentParser(text).run(); }

}  // namespace dedem::config
