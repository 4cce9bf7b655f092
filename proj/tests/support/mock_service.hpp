// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <functional>
#include <string>
#include <thread>

namespace citss::testing {

/// Loopback chat-completions server for exercising the text-service client.
/// The handler receives the prompt and a global hit counter and returns the
/// reply text.
class MockService {
 public:
  using Handler = std::function<std::string(const std::string& prompt, int hit)>;

  explicit MockService(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      const std::string prompt =
          body.at("messages").at(0).at("content").get<std::string>();
      const int hit = hits_.fetch_add(1);
      nlohmann::json reply;
      reply["choices"] = nlohmann::json::array(
          {{{"message", {{"role", "assistant"},
                         {"content", handler_(prompt, hit)}}}}});
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockService() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_) +
           "/v1/chat/completions";
  }

  int hits() const { return hits_.load(); }

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> hits_{0};
};

}  // namespace citss::testing
