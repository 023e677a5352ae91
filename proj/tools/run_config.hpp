#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace smodcli {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// First line of the reproducibility footer appended to every output CSV.
inline constexpr const char* kFooterMarker = "# [stratmod run]";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads `key = value` lines. A file containing the footer marker (any CSV
/// this tool wrote) is read from its `# key = value` footer lines instead, so
/// an output can be replayed as a config.
KeyValues read_config(const std::filesystem::path& path);

/// Splices config entries in front of the command-line flags as
/// `--key value` pairs. Later flags override earlier ones, so explicit flags
/// win over the file. The footer's `command` entry must match the subcommand.
std::vector<std::string> expand_config_args(int argc, char** argv);

std::string footer(const std::string& command, const KeyValues& params);

}  // namespace smodcli
