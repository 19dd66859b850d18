#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "natprog/sampler.hpp"

namespace natprog {

struct HttpSamplerConfig {
  std::string url;                              // e.g. http://localhost:8000/v1/completions
  std::string token_env = "NATPROG_API_TOKEN";  // bearer token, sent when set
  std::size_t max_tokens = 128;
  double temperature = 1.0;
  std::chrono::seconds timeout{60};
};

/// Generic text-completion client. Sends {"prompt", "max_tokens", "n",
/// "temperature"} and reads {"choices": [{"text": ...}, ...]}. Plain http
/// only.
class HttpSampler final : public CompletionSampler {
 public:
  explicit HttpSampler(HttpSamplerConfig config) : config_(std::move(config)) {
    const std::string scheme = "http://";
    if (config_.url.rfind(scheme, 0) != 0) throw SamplerError("sampler url must start with http://");
    auto slash = config_.url.find('/', scheme.size());
    origin_ = config_.url.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : config_.url.substr(slash);
  }

  std::vector<std::string> sample(const std::string& prompt, std::size_t n) override {
    httplib::Client client(origin_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    httplib::Headers headers;
    if (const char* token = std::getenv(config_.token_env.c_str()); token && *token)
      headers.emplace("Authorization", std::string("Bearer ") + token);
    nlohmann::json body{{"prompt", prompt},
                        {"max_tokens", config_.max_tokens},
                        {"n", n},
                        {"temperature", config_.temperature}};
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw SamplerError("sampler request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw SamplerError("sampler returned HTTP " + std::to_string(res->status));
    try {
      auto j = nlohmann::json::parse(res->body);
      std::vector<std::string> out;
      for (const auto& c : j.at("choices")) {
        out.push_back(c.at("text").get<std::string>());
        if (out.size() == n) break;
      }
      return out;
    } catch (const nlohmann::json::exception& e) {
      throw SamplerError(std::string("malformed sampler response: ") + e.what());
    }
  }

 private:
  HttpSamplerConfig config_;
  std::string origin_;
  std::string path_;
};

}  // namespace natprog
