#pragma once

// OpenAI-compatible chat-completions client. Kept apart from oracle.hpp so
// that code not talking to a live model does not pull in httplib.

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "specgen/error.hpp"
#include "specgen/oracle.hpp"

namespace specgen {

struct http_oracle_settings {
  std::string base_url = "http://127.0.0.1:8000/v1"; // chat/completions is appended
  std::string model;
  std::string token;
  std::string persona = "live";
  double temperature = 0.0;
  int max_tokens = 4096;
  int retries = 3;
  double backoff_seconds = 1.0; // doubled after every failed attempt
  double request_timeout = 300.0;
  std::string system_prompt = "You are an expert in ACSL and Frama-C/WP.";

  // SPECGEN_ORACLE_URL, SPECGEN_ORACLE_MODEL, SPECGEN_ORACLE_TOKEN,
  // SPECGEN_ORACLE_TEMPERATURE override the defaults.
  static http_oracle_settings from_env(http_oracle_settings s) {
    if (const char *v = std::getenv("SPECGEN_ORACLE_URL")) s.base_url = v;
    if (const char *v = std::getenv("SPECGEN_ORACLE_MODEL")) s.model = v;
    if (const char *v = std::getenv("SPECGEN_ORACLE_TOKEN")) s.token = v;
    if (const char *v = std::getenv("SPECGEN_ORACLE_TEMPERATURE")) s.temperature = std::atof(v);
    return s;
  }

  static http_oracle_settings from_json(const nlohmann::json &j, http_oracle_settings s) {
    s.base_url = j.value("base_url", s.base_url);
    s.model = j.value("model", s.model);
    s.token = j.value("token", s.token);
    s.persona = j.value("persona", s.persona);
    s.temperature = j.value("temperature", s.temperature);
    s.max_tokens = j.value("max_tokens", s.max_tokens);
    s.retries = j.value("retries", s.retries);
    s.backoff_seconds = j.value("backoff_seconds", s.backoff_seconds);
    s.request_timeout = j.value("request_timeout", s.request_timeout);
    s.system_prompt = j.value("system_prompt", s.system_prompt);
    return s;
  }
};

class http_oracle : public oracle {
public:
  explicit http_oracle(http_oracle_settings s) : s_(std::move(s)) {
    // split "scheme://host:port/prefix"
    auto scheme_end = s_.base_url.find("://");
    auto host_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_begin = s_.base_url.find('/', host_begin);
    origin_ = s_.base_url.substr(0, path_begin);
    prefix_ = path_begin == std::string::npos ? "" : s_.base_url.substr(path_begin);
    while (!prefix_.empty() && prefix_.back() == '/')
      prefix_.pop_back();
  }

  completion complete(const oracle_request &req) override {
    nlohmann::json body = {
        {"model", s_.model},
        {"temperature", s_.temperature},
        {"max_tokens", s_.max_tokens},
        {"messages",
         {{{"role", "system"}, {"content", s_.system_prompt}},
          {{"role", "user"}, {"content", req.prompt}}}},
    };
    const std::string payload = body.dump();
    std::string last_error;
    double wait = s_.backoff_seconds;
    for (int attempt = 0; attempt <= s_.retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(wait));
        wait *= 2;
      }
      httplib::Client cli(origin_);
      const auto t = std::chrono::duration<double>(s_.request_timeout);
      cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(t));
      cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(t));
      httplib::Headers headers;
      if (!s_.token.empty())
        headers.emplace("Authorization", "Bearer " + s_.token);
      auto res = cli.Post(prefix_ + "/chat/completions", headers, payload, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200)
        throw oracle_unavailable("oracle rejected the request: HTTP " + std::to_string(res->status) +
                                 " " + res->body.substr(0, 200));
      try {
        auto j = nlohmann::json::parse(res->body);
        const auto &content = j.at("choices").at(0).at("message").at("content");
        return {content.is_string() ? content.get<std::string>() : std::string{}, std::nullopt};
      } catch (const nlohmann::json::exception &e) {
        last_error = std::string("malformed response: ") + e.what();
      }
    }
    throw oracle_unavailable("oracle at " + s_.base_url + " unavailable after " +
                             std::to_string(s_.retries + 1) + " attempts: " + last_error);
  }

  std::string describe() const override { return s_.persona + "(" + s_.model + ")"; }

  nlohmann::json parameters() const override {
    return {{"kind", "http"},           {"base_url", s_.base_url},
            {"model", s_.model},        {"persona", s_.persona},
            {"temperature", s_.temperature}, {"max_tokens", s_.max_tokens},
            {"retries", s_.retries},    {"backoff_seconds", s_.backoff_seconds}};
  }

private:
  http_oracle_settings s_;
  std::string origin_;
  std::string prefix_;
};

} // namespace specgen
