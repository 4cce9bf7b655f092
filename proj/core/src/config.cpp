// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#include "citss/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "citss/errors.hpp"
#include "citss/rng.hpp"

namespace citss {
namespace {

struct KeyDefault {
  const char* key;
  const char* value;
};

// One entry per known key. The default column doubles as documentation of the
// expected value shape.
const KeyDefault kRegistry[] = {
    {"dataset.id", "custom"},
    {"dataset.path", ""},
    {"dataset.val_fraction", "0.15"},
    {"context.l", "3"},

    {"augment.beta", "0.6"},
    {"augment.gamma", "0.1"},
    {"augment.op", "mixed"},
    {"augment.synonyms", ""},

    {"stk.cache_dir", ""},
    {"stk.base_file", ""},
    {"stk.retries", "3"},
    {"stk.max_inflight", "1"},

    {"service.url", ""},
    {"service.model", ""},
    {"service.api_key_env", "CITSS_API_KEY"},
    {"service.timeout_s", "120"},
    {"service.temperature", "0"},

    {"backbone.name", "hashed-encoder"},
    {"backbone.kind", "encoder"},
    {"backbone.hidden", "64"},
    {"backbone.vocab", "4096"},
    {"backbone.max_len", "160"},
    {"backbone.trainable", "true"},
    {"backbone.prompt_file", ""},
    {"backbone.mask_token", "[MASK]"},
    {"backbone.wrapper.enabled", "false"},
    {"backbone.wrapper.rank", "16"},
    {"backbone.wrapper.alpha", "16"},

    {"adapter.d", "1024"},
    {"adapter.d_z", "256"},
    {"adapter.dropout", "0"},

    {"loss.lambda1", "0.2"},
    {"loss.lambda2", "0.1"},
    {"loss.omega", "0.01"},
    {"loss.tau1", "1"},
    {"loss.tau2", "1"},
    {"loss.pnt_scope", "all"},

    {"train.batch_size", "4"},
    {"train.lr", "2e-5"},
    {"train.max_epochs", "10"},
    {"train.patience", "0"},
    {"train.grad_clip", "0"},
    {"train.seed", "1"},

    {"eval.runs", "3"},
};

std::string trim(std::string s) {
  const auto notspace = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

bool known(const std::string& key) {
  for (const auto& e : kRegistry)
    if (key == e.key) return true;
  return false;
}

}  // namespace

Config Config::defaults() {
  Config c;
  for (const auto& e : kRegistry) c.values_[e.key] = e.value;
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Config c = defaults();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known(key))
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": unknown key `" + key + "`");
    c.values_[key] = value;
  }
  return c;
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must be key=value, got `" + assignment + "`");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  if (!known(key)) throw ConfigError("unknown override key `" + key + "`");
  values_[key] = value;
}

void Config::set(const std::string& key, const std::string& value) {
  if (!known(key)) throw ConfigError("unknown config key `" + key + "`");
  values_[key] = value;
}

const std::string& Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key `" + key + "`");
  return it->second;
}

bool Config::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key `" + key + "`: expected boolean, got `" + v + "`");
}

int Config::get_int(const std::string& key) const {
  return static_cast<int>(get_i64(key));
}

std::int64_t Config::get_i64(const std::string& key) const {
  const std::string& v = get(key);
  char* end = nullptr;
  const long long parsed = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("key `" + key + "`: expected integer, got `" + v + "`");
  return parsed;
}

double Config::get_double(const std::string& key) const {
  const std::string& v = get(key);
  char* end = nullptr;
  const double parsed = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("key `" + key + "`: expected number, got `" + v + "`");
  return parsed;
}

std::string Config::snapshot() const {
  std::ostringstream out;
  for (const auto& [key, value] : values_) out << key << " = " << value << "\n";
  return out.str();
}

std::uint64_t Config::hash() const { return fnv1a64(snapshot()); }

const std::vector<std::string>& Config::known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& e : kRegistry) k.emplace_back(e.key);
    std::sort(k.begin(), k.end());
    return k;
  }();
  return keys;
}

}  // namespace citss
