// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace citss {

/// Flat dotted-key configuration. A config starts from the built-in defaults,
/// is overlaid by a `key = value` file and then by command-line overrides.
/// Unknown keys are rejected in both places so that typos cannot silently
/// fall back to defaults. The resolved snapshot (all keys, sorted) plus the
/// seed fully determines a run.
class Config {
 public:
  /// Built-in defaults for every known key.
  static Config defaults();

  /// Defaults overlaid with the given file. Lines are `key = value`; blank
  /// lines and `#` comments are ignored.
  static Config load(const std::string& path);

  /// Applies one `key=value` override. Throws ConfigError on unknown keys or
  /// malformed input.
  void apply_override(const std::string& assignment);

  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::int64_t get_i64(const std::string& key) const;
  double get_double(const std::string& key) const;

  bool empty(const std::string& key) const { return get(key).empty(); }

  /// Canonical `key = value` lines, sorted by key. Written verbatim as the
  /// run directory's config.snapshot.
  std::string snapshot() const;

  /// FNV-1a of the snapshot; names run directories and stamps checkpoints.
  std::uint64_t hash() const;

  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace citss
