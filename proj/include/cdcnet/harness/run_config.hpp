#pragma once

#include <map>
#include <string>
#include <vector>

namespace cdcnet {

struct ConfigKey {
  std::string name;
  std::string help;
};

/// Every key a run config may contain, in resolved-output order.
const std::vector<ConfigKey>& config_keys();

/// Flat `key = value` configuration. Keys not listed in config_keys() are
/// rejected. Values left unset fall back to the preset defaults of the
/// command being run.
class RunConfig {
 public:
  /// `#` starts a comment; blank lines are ignored. Throws ConfigError with
  /// the line number.
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  /// Fills unset keys with the defaults of `preset` (desk or full) for the
  /// given command.
  RunConfig resolved(const std::string& command) const;

  const std::string& str(const std::string& key) const;
  double num(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  bool flag(const std::string& key) const;
  /// Comma-separated list; empty string gives an empty list.
  std::vector<std::string> list(const std::string& key) const;

  /// Canonical text form, one `key = value` line per set key.
  std::string format() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace cdcnet
