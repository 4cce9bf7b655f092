// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

namespace citss::log {

/// Mirror all subsequent log lines into the given file (the run directory's
/// log.txt). Pass an empty path to stop mirroring.
void set_file(const std::string& path);

void info(const std::string& message);
void warn(const std::string& message);

}  // namespace citss::log
