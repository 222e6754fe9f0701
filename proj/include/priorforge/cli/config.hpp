#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace priorforge::cli {

struct ConfigEntry
{
  std::string key;
  std::string value; ///< arrays are joined with ','
  int line = 0;
};

/// Parses `key = value` lines. '#' starts a comment, `[section]` headers are
/// accepted and ignored, values may be bare, "quoted", or [a, b, c] lists.
/// Errors are ConfigError("<file>:<line>: ...").
std::vector<ConfigEntry> parse_config(std::string const &text, std::string const &origin = "<config>");
std::vector<ConfigEntry> load_config(std::filesystem::path const &path);

/// Entries as command-line tokens: `--key value`, `--key` for true,
/// nothing for false.
std::vector<std::string> config_to_args(std::vector<ConfigEntry> const &entries);

} // namespace priorforge::cli
