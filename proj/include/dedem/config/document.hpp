#pragma once

#include "dedem/common.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dedem::config {

/// Value of a `key = value` entry: number, quoted string, boolean or a
/// (possibly nested, possibly multi-line) bracketed array.
struct Value {
  using Array = std::vector<Value>;
  std::variant<double, std::string, bool, Array> data;
  std::size_t line = 0;
  std::size_t column = 0;

  bool is_number() const { return std::holds_alternative<double>(data); }
  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_array() const { return std::holds_alternative<Array>(data); }
};

struct Entry {
  std::string key;
  Value value;
};

struct Section {
  std::string name;  // empty for the top-level block
  std::size_t line = 0;
  std::vector<Entry> entries;

  const Value* find(std::string_view key) const;
};

/// Parsed structured text: top-level entries followed by `[section]` blocks in
/// file order. Duplicate section names and duplicate keys are syntax errors.
struct Document {
  Section root;
  std::vector<Section> sections;

  const Section* find(std::string_view name) const;
};

Document parse_document(std::string_view text);

}  // namespace dedem::config
