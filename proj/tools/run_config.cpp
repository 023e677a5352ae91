#include "run_config.hpp"

#include <fstream>
#include <sstream>

namespace smodcli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_entry(const std::string& text, KeyValues& out) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) return false;
  std::string key = trim(text.substr(0, eq));
  if (key.empty()) return false;
  out.emplace_back(std::move(key), trim(text.substr(eq + 1)));
  return true;
}

}  // namespace

KeyValues read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(trim(line));

  KeyValues out;
  bool footer_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i] != kFooterMarker) continue;
    footer_seen = true;
    out.clear();
    for (std::size_t j = i + 1; j < lines.size() && !lines[j].empty() && lines[j][0] == '#'; ++j)
      parse_entry(trim(lines[j].substr(1)), out);
  }
  if (footer_seen) return out;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (!parse_entry(line, out))
      throw ConfigError(path.string() + ":" + std::to_string(i + 1) +
                        ": expected `key = value`, found \"" + line + "\"");
  }
  return out;
}

std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string config_path;
  std::vector<std::string> rest;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a file argument");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) return args;

  if (rest.empty() || rest.front().empty() || rest.front()[0] == '-')
    throw ConfigError("--config must follow a subcommand");
  const std::string& command = rest.front();

  std::vector<std::string> out{args[0], command};
  for (const auto& [key, value] : read_config(config_path)) {
    if (key == "command") {
      if (value != command)
        throw ConfigError("config " + config_path + " was written by `" + value +
                          "`, not `" + command + "`");
      continue;
    }
    out.push_back("--" + key);
    out.push_back(value);
  }
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

std::string footer(const std::string& command, const KeyValues& params) {
  std::ostringstream out;
  out << kFooterMarker << '\n' << "# command = " << command << '\n';
  for (const auto& [key, value] : params) out << "# " << key << " = " << value << '\n';
  return out.str();
}

}  // namespace smodcli
