// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#include "citss/text_service.hpp"

#include <chrono>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "citss/errors.hpp"

namespace citss::service {
namespace {

using nlohmann::json;

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;  // /v1/chat/completions
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error("service.url must include a scheme: " + url);
  const auto path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) return {url, "/"};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

class HttpTextGenClient final : public TextGenClient {
 public:
  explicit HttpTextGenClient(ServiceConfig config)
      : config_(std::move(config)) {
    if (config_.url.empty()) throw Error("service.url is not configured");
  }

  std::string complete(const std::string& prompt) override {
    const SplitUrl url = split_url(config_.url);
    httplib::Client client(url.base);
    client.set_connection_timeout(std::chrono::milliseconds(
        static_cast<int>(config_.timeout_s * 1000)));
    client.set_read_timeout(
        std::chrono::milliseconds(static_cast<int>(config_.timeout_s * 1000)));
    httplib::Headers headers;
    if (!config_.api_key.empty())
      headers.emplace("Authorization", "Bearer " + config_.api_key);

    json body;
    body["model"] = config_.model;
    body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = config_.temperature;

    const auto res =
        client.Post(url.path, headers, body.dump(), "application/json");
    if (!res)
      throw Error("text service unreachable: " + config_.url + " (" +
                  httplib::to_string(res.error()) + ")");
    if (res->status != 200)
      throw Error("text service returned HTTP " + std::to_string(res->status) +
                  ": " + res->body);

    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::exception& e) {
      throw Error(std::string("text service reply is not JSON: ") + e.what());
    }
    if (reply.contains("choices") && reply["choices"].is_array() &&
        !reply["choices"].empty()) {
      const auto& choice = reply["choices"][0];
      if (choice.contains("message") && choice["message"].contains("content"))
        return choice["message"]["content"].get<std::string>();
      if (choice.contains("text")) return choice["text"].get<std::string>();
    }
    for (const char* field : {"text", "content"})
      if (reply.contains(field) && reply[field].is_string())
        return reply[field].get<std::string>();
    throw Error("text service reply has no recognizable text field: " +
                res->body);
  }

  std::unique_ptr<TextGenClient> clone() const override {
    return std::make_unique<HttpTextGenClient>(config_);
  }

 private:
  ServiceConfig config_;
};

}  // namespace

std::unique_ptr<TextGenClient> make_http_client(const ServiceConfig& config) {
  return std::make_unique<HttpTextGenClient>(config);
}

}  // namespace citss::service
