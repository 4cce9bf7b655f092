// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace citss {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration / usage errors. The CLI maps these to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised when a model reply contains no parseable payload. Carries the raw
/// reply so the caller can retry or report it.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string raw_text)
      : Error(message), raw(std::move(raw_text)) {}

  std::string raw;
};

/// Raised by the trainer when a loss turns non-finite; the message carries a
/// diagnostic dump of the offending batch.
class NonFiniteLossError : public Error {
 public:
  using Error::Error;
};

}  // namespace citss
