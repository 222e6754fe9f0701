#include "priorforge/cli/config.hpp"

#include "priorforge/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace priorforge::cli {

namespace {

std::string trim(std::string_view s)
{
  auto const b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  auto const e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string const &s, std::string const &where)
{
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'')) {
    if (s.back() != s.front()) {
      throw ConfigError(fmt::format("{}: unterminated string", where));
    }
    return s.substr(1, s.size() - 2);
  }
  if (!s.empty() && (s.front() == '"' || s.front() == '\'')) {
    throw ConfigError(fmt::format("{}: unterminated string", where));
  }
  return s;
}

// Drops a trailing comment that is not inside quotes.
std::string strip_comment(std::string const &line)
{
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char const c = line[i];
    if (quote) {
      if (c == quote) {
        quote = 0;
      }
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

} // namespace

std::vector<ConfigEntry> parse_config(std::string const &text, std::string const &origin)
{
  std::vector<ConfigEntry> out;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto const where = fmt::format("{}:{}", origin, lineno);
    auto const line = trim(strip_comment(raw));
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(fmt::format("{}: malformed section header '{}'", where, line));
      }
      continue;
    }
    auto const eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}: expected 'key = value', got '{}'", where, line));
    }
    auto key = trim(std::string_view(line).substr(0, eq));
    auto value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(fmt::format("{}: missing key", where));
    }
    for (char c : key) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) {
        throw ConfigError(fmt::format("{}: invalid key '{}'", where, key));
      }
    }
    if (value.empty()) {
      throw ConfigError(fmt::format("{}: missing value for '{}'", where, key));
    }
    std::replace(key.begin(), key.end(), '_', '-');
    if (value.front() == '[') {
      if (value.back() != ']') {
        throw ConfigError(fmt::format("{}: unterminated list for '{}'", where, key));
      }
      std::string joined;
      std::istringstream items(value.substr(1, value.size() - 2));
      std::string item;
      while (std::getline(items, item, ',')) {
        auto v = unquote(trim(item), where);
        if (v.empty()) {
          throw ConfigError(fmt::format("{}: empty list element for '{}'", where, key));
        }
        joined += joined.empty() ? v : "," + v;
      }
      if (joined.empty()) {
        throw ConfigError(fmt::format("{}: empty list for '{}'", where, key));
      }
      value = joined;
    } else {
      value = unquote(value, where);
    }
    out.push_back({key, value, lineno});
  }
  return out;
}

std::vector<ConfigEntry> load_config(std::filesystem::path const &path)
{
  std::ifstream f(path);
  if (!f) {
    throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  }
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::vector<std::string> config_to_args(std::vector<ConfigEntry> const &entries)
{
  std::vector<std::string> args;
  for (auto const &e : entries) {
    if (e.value == "false") {
      continue;
    }
    args.push_back("--" + e.key);
    if (e.value != "true") {
      args.push_back(e.value);
    }
  }
  return args;
}

} // namespace priorforge::cli
