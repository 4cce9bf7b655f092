// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#include "citss/logging.hpp"

#include <fstream>
#include <iostream>
#include <mutex>

namespace citss::log {
namespace {

std::mutex g_mutex;
std::ofstream g_file;

void emit(const char* level, const std::string& message) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << level << message << "\n";
  if (g_file.is_open()) {
    g_file << level << message << "\n";
    g_file.flush();
  }
}

}  // namespace

void set_file(const std::string& path) {
  std::lock_guard<std::mutex> lock(g_mutex);
  if (g_file.is_open()) g_file.close();
  if (!path.empty()) g_file.open(path, std::ios::app);
}

void info(const std::string& message) { emit("[citss] ", message); }
void warn(const std::string& message) { emit("[citss] warning: ", message); }

}  // namespace citss::log
