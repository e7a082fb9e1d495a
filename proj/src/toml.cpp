#include "ric/toml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ric {

using nlohmann::json;

namespace {

[[noreturn]] void fail(size_t line, const std::string& what) {
  throw std::runtime_error("toml parse error at line " + std::to_string(line) +
                           ": " + what);
}

std::string strip(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Removes a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  char quote = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (in_str) {
      if (c == '\\' && quote == '"') { ++i; continue; }
      if (c == quote) in_str = false;
    } else if (c == '"' || c == '\'') {
      in_str = true;
      quote = c;
    } else if (c == '#') {
      return s.substr(0, i);
    }
  }
  return s;
}

std::string parse_basic_string(const std::string& s, size_t line) {
  std::string out;
  for (size_t i = 1; i + 1 < s.size(); ++i) {
    char c = s[i];
    if (c == '\\') {
      if (i + 2 >= s.size()) fail(line, "dangling escape");
      char e = s[++i];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(line, std::string("unsupported escape \\") + e);
      }
    } else {
      out += c;
    }
  }
  return out;
}

json parse_value(const std::string& raw, size_t line);

json parse_array(const std::string& raw, size_t line) {
  json arr = json::array();
  std::string inner = strip(raw.substr(1, raw.size() - 2));
  if (inner.empty()) return arr;
  // Split on commas outside string literals.
  std::vector<std::string> parts;
  std::string cur;
  bool in_str = false;
  char quote = 0;
  for (size_t i = 0; i < inner.size(); ++i) {
    char c = inner[i];
    if (in_str) {
      if (c == '\\' && quote == '"') { cur += c; cur += inner[++i]; continue; }
      if (c == quote) in_str = false;
      cur += c;
    } else if (c == '"' || c == '\'') {
      in_str = true;
      quote = c;
      cur += c;
    } else if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!strip(cur).empty()) parts.push_back(cur);
  for (const auto& p : parts) arr.push_back(parse_value(strip(p), line));
  return arr;
}

json parse_value(const std::string& raw, size_t line) {
  if (raw.empty()) fail(line, "empty value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') fail(line, "unterminated string");
    return parse_basic_string(raw, line);
  }
  if (raw.front() == '\'') {
    if (raw.size() < 2 || raw.back() != '\'') fail(line, "unterminated string");
    return raw.substr(1, raw.size() - 2);
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') fail(line, "unterminated array");
    return parse_array(raw, line);
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  try {
    size_t consumed = 0;
    if (raw.find_first_of(".eE") != std::string::npos) {
      double d = std::stod(raw, &consumed);
      if (consumed == raw.size()) return d;
    } else {
      long long v = std::stoll(raw, &consumed);
      if (consumed == raw.size()) return v;
    }
  } catch (const std::exception&) {
    // fall through
  }
  fail(line, "unrecognized value '" + raw + "'");
}

std::string parse_key(const std::string& raw, size_t line) {
  std::string key = strip(raw);
  if (key.size() >= 2 && (key.front() == '"' || key.front() == '\''))
    return key.substr(1, key.size() - 2);
  for (char c : key) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      fail(line, "bare key contains invalid character '" + std::string(1, c) + "'");
  }
  if (key.empty()) fail(line, "empty key");
  return key;
}

}  // namespace

json parse_toml(const std::string& text) {
  json root = json::object();
  json* current = &root;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = strip(strip_comment(line));
    if (s.empty()) continue;
    if (s.size() >= 4 && s.substr(0, 2) == "[[" &&
        s.substr(s.size() - 2) == "]]") {
      std::string name = parse_key(s.substr(2, s.size() - 4), lineno);
      if (!root.contains(name)) root[name] = json::array();
      if (!root[name].is_array()) fail(lineno, "'" + name + "' is not a table array");
      root[name].push_back(json::object());
      current = &root[name].back();
      continue;
    }
    if (s.front() == '[' && s.back() == ']') {
      std::string name = parse_key(s.substr(1, s.size() - 2), lineno);
      if (!root.contains(name)) root[name] = json::object();
      if (!root[name].is_object()) fail(lineno, "'" + name + "' is not a table");
      current = &root[name];
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) fail(lineno, "expected key = value");
    std::string key = parse_key(s.substr(0, eq), lineno);
    std::string value = strip(s.substr(eq + 1));
    // Multi-line arrays: keep consuming until brackets balance.
    if (!value.empty() && value.front() == '[') {
      int depth = 0;
      auto count = [&](const std::string& chunk) {
        bool in_str = false;
        char quote = 0;
        for (size_t i = 0; i < chunk.size(); ++i) {
          char c = chunk[i];
          if (in_str) {
            if (c == '\\' && quote == '"') { ++i; continue; }
            if (c == quote) in_str = false;
          } else if (c == '"' || c == '\'') {
            in_str = true; quote = c;
          } else if (c == '[') {
            ++depth;
          } else if (c == ']') {
            --depth;
          }
        }
      };
      count(value);
      while (depth > 0 && std::getline(in, line)) {
        ++lineno;
        std::string more = strip(strip_comment(line));
        count(more);
        value += " " + more;
      }
      if (depth != 0) fail(lineno, "unterminated array");
    }
    (*current)[key] = parse_value(strip(value), lineno);
  }
  return root;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
    return json::parse(buf.str());
  return parse_toml(buf.str());
}

}  // namespace ric
