#include "octplaque/tomlmini.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace octplaque::tomlmini {

const std::string& Value::as_string() const {
  if (!is_string()) throw std::runtime_error("toml value is not a string");
  return std::get<std::string>(v);
}

long long Value::as_int() const {
  if (!is_int()) throw std::runtime_error("toml value is not an integer");
  return std::get<long long>(v);
}

double Value::as_number() const {
  if (is_int()) return static_cast<double>(std::get<long long>(v));
  if (is_float()) return std::get<double>(v);
  throw std::runtime_error("toml value is not a number");
}

bool Value::as_bool() const {
  if (!is_bool()) throw std::runtime_error("toml value is not a boolean");
  return std::get<bool>(v);
}

const std::vector<Value>& Value::as_array() const {
  if (!is_array()) throw std::runtime_error("toml value is not an array");
  return std::get<std::vector<Value>>(v);
}

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw std::runtime_error("toml line " + std::to_string(line) + ": " + what);
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      return false;
  return true;
}

// Parses one scalar or array token; `rest` must already be trimmed.
Value parse_value(std::string_view rest, int line);

Value parse_scalar(std::string_view tok, int line) {
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
      char c = tok[i];
      if (c == '\\') {
        if (i + 2 >= tok.size()) fail(line, "dangling escape");
        const char e = tok[++i];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(line, "unsupported escape sequence");
        }
      } else {
        out += c;
      }
    }
    return Value{out};
  }
  if (tok == "true") return Value{true};
  if (tok == "false") return Value{false};

  const std::string s(tok);
  const bool looks_float = s.find_first_of(".eE") != std::string::npos &&
                           s.find("0x") == std::string::npos;
  if (!looks_float) {
    long long iv = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), iv);
    if (ec == std::errc() && p == s.data() + s.size()) return Value{iv};
  }
  try {
    std::size_t used = 0;
    const double d = std::stod(s, &used);
    if (used == s.size()) return Value{d};
  } catch (...) {
  }
  fail(line, "cannot parse value: " + s);
}

Value parse_value(std::string_view rest, int line) {
  if (!rest.empty() && rest.front() == '[') {
    if (rest.back() != ']') fail(line, "unterminated array");
    std::string_view inner = strip(rest.substr(1, rest.size() - 2));
    std::vector<Value> items;
    while (!inner.empty()) {
      std::size_t cut = std::string_view::npos;
      bool in_string = false;
      for (std::size_t i = 0; i < inner.size(); ++i) {
        const char c = inner[i];
        if (c == '"' && (i == 0 || inner[i - 1] != '\\')) in_string = !in_string;
        if (c == ',' && !in_string) {
          cut = i;
          break;
        }
      }
      std::string_view tok =
          cut == std::string_view::npos ? inner : inner.substr(0, cut);
      tok = strip(tok);
      if (tok.empty()) fail(line, "empty array element");
      items.push_back(parse_scalar(tok, line));
      if (cut == std::string_view::npos) break;
      inner = strip(inner.substr(cut + 1));
    }
    return Value{items};
  }
  return parse_scalar(rest, line);
}

std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (c == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

void write_value(std::ostream& out, const Value& val) {
  if (val.is_string()) {
    out << '"';
    for (char c : std::get<std::string>(val.v)) {
      switch (c) {
        case '"': out << "\\\""; break;
        case '\\': out << "\\\\"; break;
        case '\n': out << "\\n"; break;
        case '\t': out << "\\t"; break;
        default: out << c;
      }
    }
    out << '"';
  } else if (val.is_int()) {
    out << std::get<long long>(val.v);
  } else if (val.is_float()) {
    std::ostringstream tmp;
    tmp.precision(17);
    tmp << std::get<double>(val.v);
    std::string s = tmp.str();
    if (s.find_first_of(".eEnN") == std::string::npos) s += ".0";
    out << s;
  } else if (val.is_bool()) {
    out << (std::get<bool>(val.v) ? "true" : "false");
  } else {
    out << '[';
    const auto& items = std::get<std::vector<Value>>(val.v);
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out << ", ";
      write_value(out, items[i]);
    }
    out << ']';
  }
}

}  // namespace

Document parse(const std::string& text) {
  Document doc;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = strip(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated table header");
      std::string_view name = strip(line.substr(1, line.size() - 2));
      if (!valid_key(name)) fail(line_no, "bad table name");
      section = std::string(name);
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    std::string_view key = strip(line.substr(0, eq));
    std::string_view rest = strip(line.substr(eq + 1));
    if (!valid_key(key)) fail(line_no, "bad key name");
    if (rest.empty()) fail(line_no, "missing value");

    std::string full =
        section.empty() ? std::string(key) : section + "." + std::string(key);
    if (doc.count(full)) fail(line_no, "duplicate key: " + full);
    doc.emplace(std::move(full), parse_value(rest, line_no));
  }
  return doc;
}

Document parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string write(const Document& doc) {
  std::ostringstream out;
  // Bare keys first, then sections in map order (already sorted).
  for (const auto& [key, val] : doc) {
    if (key.find('.') != std::string::npos) continue;
    out << key << " = ";
    write_value(out, val);
    out << '\n';
  }
  std::string current;
  for (const auto& [key, val] : doc) {
    const std::size_t dot = key.find('.');
    if (dot == std::string::npos) continue;
    const std::string section = key.substr(0, dot);
    if (section != current) {
      out << "\n[" << section << "]\n";
      current = section;
    }
    out << key.substr(dot + 1) << " = ";
    write_value(out, val);
    out << '\n';
  }
  return out.str();
}

void write_file(const Document& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << write(doc);
}

}  // namespace octplaque::tomlmini
