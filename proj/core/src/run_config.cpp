#include "mftb/run_config.hpp"

#include <fstream>
#include <sstream>

namespace mftb::io {

namespace {

std::string trim(std::string_view s) {
  std::size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) {
    return {};
  }
  std::size_t end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

}  // namespace

RunConfig RunConfig::parse_file(const std::filesystem::path& path,
                                const std::set<std::string>& allowed_keys) {
  std::ifstream in(path);
  if (!in) {
    throw IoFailure("run config: cannot open " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str(), allowed_keys);
}

RunConfig RunConfig::parse_string(std::string_view text,
                                  const std::set<std::string>& allowed_keys) {
  RunConfig config;
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view raw = eol == std::string_view::npos
                               ? text.substr(pos)
                               : text.substr(pos, eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_number;

    std::string_view line = raw.substr(0, raw.find('#'));
    std::string trimmed = trim(line);
    if (trimmed.empty()) {
      continue;
    }
    std::size_t equals = trimmed.find('=');
    if (equals == std::string::npos) {
      throw ConfigError("run config line " + std::to_string(line_number) +
                        ": expected key = value, got \"" + trimmed + "\"");
    }
    std::string key = trim(std::string_view(trimmed).substr(0, equals));
    std::string value = trim(std::string_view(trimmed).substr(equals + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("run config line " + std::to_string(line_number) +
                        ": empty key or value");
    }
    if (allowed_keys.find(key) == allowed_keys.end()) {
      throw ConfigError("run config: unknown key \"" + key + "\"");
    }
    if (config.entries_.count(key) != 0) {
      throw ConfigError("run config: duplicate key \"" + key + "\"");
    }
    config.entries_[key] = value;
  }
  return config;
}

bool RunConfig::has(const std::string& key) const {
  return entries_.count(key) != 0;
}

const std::string& RunConfig::get_string(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw ConfigError("run config: missing key \"" + key + "\"");
  }
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& value = get_string(key);
  try {
    std::size_t used = 0;
    double parsed = std::stod(value, &used);
    if (used != value.size()) {
      throw ConfigError("");
    }
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("run config: key \"" + key + "\" has non-numeric value \"" +
                      value + "\"");
  }
}

long RunConfig::get_long(const std::string& key) const {
  const std::string& value = get_string(key);
  try {
    std::size_t used = 0;
    long parsed = std::stol(value, &used);
    if (used != value.size()) {
      throw ConfigError("");
    }
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("run config: key \"" + key + "\" has non-integer value \"" +
                      value + "\"");
  }
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string& value = get_string(key);
  try {
    std::size_t used = 0;
    unsigned long long parsed = std::stoull(value, &used);
    if (used != value.size()) {
      throw ConfigError("");
    }
    return static_cast<std::uint64_t>(parsed);
  } catch (const std::exception&) {
    throw ConfigError("run config: key \"" + key +
                      "\" has non-integer value \"" + value + "\"");
  }
}

}  // namespace mftb::io
