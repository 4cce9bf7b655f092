// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

namespace citss::service {

struct ServiceConfig {
  std::string url;      // full endpoint URL, e.g. http://host:8000/v1/chat/completions
  std::string model;
  std::string api_key;  // optional bearer token
  double timeout_s = 120.0;
  double temperature = 0.0;
};

/// A text-generation service: one prompt string in, one reply string out.
/// Implementations must be safe to call from multiple threads or be cloned
/// per worker via `clone()`.
class TextGenClient {
 public:
  virtual ~TextGenClient() = default;
  virtual std::string complete(const std::string& prompt) = 0;
  virtual std::unique_ptr<TextGenClient> clone() const = 0;
};

/// Chat-completions HTTP client. Sends `{"model", "messages", "temperature"}`
/// and reads `choices[0].message.content` (falling back to `choices[0].text`
/// and to a top-level `text`/`content` field for plain completion servers).
std::unique_ptr<TextGenClient> make_http_client(const ServiceConfig& config);

}  // namespace citss::service
