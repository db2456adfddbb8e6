#pragma once

#include <chrono>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fsel/experts.hpp"
#include "fsel/util.hpp"

namespace fsel {

struct HttpExpertConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model;
  double timeout_seconds = 120.0;
  std::size_t max_retries = 3;  // transport-level retries
  std::string api_key_env = "OPENAI_API_KEY";
  double retry_backoff_seconds = 1.0;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// POST `body` (JSON) to a URL with the given bearer token. Throws a
/// transport error when no response arrives.
using HttpTransport =
    std::function<HttpResponse(const std::string& url, const std::string& body, const std::string& api_key, double timeout_seconds)>;

namespace detail {

inline std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) fail(ErrorKind::config, "endpoint '" + url + "' lacks a scheme");
  const auto path = url.find('/', scheme + 3);
  if (path == std::string::npos) return {url, "/"};
  return {url.substr(0, path), url.substr(path)};
}

}  // namespace detail

inline HttpResponse httplib_transport(const std::string& url, const std::string& body, const std::string& api_key,
                                      double timeout_seconds) {
  const auto [origin, path] = detail::split_url(url);
  httplib::Client client(origin);
  const auto timeout = std::chrono::duration<double>(timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
  auto res = client.Post(path, headers, body, "application/json");
  if (!res) fail(ErrorKind::transport, "request to " + url + " failed: " + httplib::to_string(res.error()));
  return {res->status, res->body};
}

/// Chat-completions client: one user message, temperature 0. Transport
/// failures and 429/5xx answers are retried; other HTTP errors are protocol errors.
class HttpExpert : public Expert {
 public:
  HttpExpert(std::string identity, HttpExpertConfig config, HttpTransport transport = httplib_transport,
             ExpertKind kind = ExpertKind::http)
      : identity_(std::move(identity)), config_(std::move(config)), transport_(std::move(transport)), kind_(kind) {
    if (config_.model.empty()) config_.model = identity_;
  }

  const std::string& identity() const override { return identity_; }
  ExpertKind kind() const override { return kind_; }
  std::size_t calls() const { return calls_; }

  std::string request_body(const std::string& prompt) const {
    nlohmann::json body{{"model", config_.model},
                        {"temperature", 0},
                        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
    return body.dump();
  }

  std::string complete(const std::string& prompt) override {
    const auto body = request_body(prompt);
    std::string api_key;
    if (!config_.api_key_env.empty()) {
      if (const char* v = std::getenv(config_.api_key_env.c_str())) api_key = v;
    }
    std::string last_error;
    for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0 && config_.retry_backoff_seconds > 0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(config_.retry_backoff_seconds * static_cast<double>(attempt)));
      }
      HttpResponse res;
      try {
        ++calls_;
        res = transport_(config_.endpoint, body, api_key, config_.timeout_seconds);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::transport) throw;
        last_error = e.what();
        continue;
      }
      if (res.status == 429 || res.status >= 500) {
        last_error = "HTTP " + std::to_string(res.status);
        continue;
      }
      if (res.status != 200) fail(ErrorKind::protocol, "HTTP " + std::to_string(res.status) + ": " + res.body.substr(0, 200));
      return extract_content(res.body);
    }
    fail(ErrorKind::transport, "giving up after " + std::to_string(config_.max_retries) + " retries: " + last_error);
  }

  static std::string extract_content(const std::string& body) {
    try {
      const auto j = nlohmann::json::parse(body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::protocol, std::string("malformed chat-completions response: ") + e.what());
    }
  }

 private:
  std::string identity_;
  HttpExpertConfig config_;
  HttpTransport transport_;
  ExpertKind kind_;
  std::size_t calls_ = 0;
};

}  // namespace fsel
