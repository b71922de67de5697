#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "mftb/errors.hpp"

namespace mftb::io {

/// Key-value run configuration: one `key = value` pair per line, `#` starts
/// a comment, blank lines are ignored. Keys must come from the allowed set;
/// anything else is rejected before any computation runs.
class RunConfig {
public:
  static RunConfig parse_file(const std::filesystem::path& path,
                              const std::set<std::string>& allowed_keys);
  static RunConfig parse_string(std::string_view text,
                                const std::set<std::string>& allowed_keys);

  bool has(const std::string& key) const;
  double get_double(const std::string& key) const;
  long get_long(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const {
    return entries_;
  }

private:
  std::map<std::string, std::string> entries_;
};

}  // namespace mftb::io
