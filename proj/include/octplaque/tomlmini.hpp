#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace octplaque::tomlmini {

/// Minimal TOML subset sufficient for flat run configurations: `[table]`
/// headers, `key = value` pairs, `#` comments, and values of type string,
/// integer, float, boolean, or a one-level array of those. No dates, no
/// nested/inline tables, no multi-line strings.
struct Value {
  std::variant<std::string, long long, double, bool, std::vector<Value>> v;

  bool operator==(const Value&) const = default;

  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_int() const { return std::holds_alternative<long long>(v); }
  bool is_float() const { return std::holds_alternative<double>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_array() const { return std::holds_alternative<std::vector<Value>>(v); }

  const std::string& as_string() const;
  long long as_int() const;
  double as_number() const;  // accepts either int or float
  bool as_bool() const;
  const std::vector<Value>& as_array() const;
};

/// Keys are flattened as "table.key"; keys before any [table] header keep
/// their bare name.
using Document = std::map<std::string, Value>;

/// Throws std::runtime_error naming the line on malformed input.
Document parse(const std::string& text);

Document parse_file(const std::string& path);

/// Serializes a document, grouping dotted keys back into [table] sections.
std::string write(const Document& doc);

void write_file(const Document& doc, const std::string& path);

}  // namespace octplaque::tomlmini
