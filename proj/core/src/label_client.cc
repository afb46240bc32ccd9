/* Copyright 2026 The Playseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "playseg/label_client.h"

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "playseg/error.h"

namespace playseg {

using Json = nlohmann::ordered_json;

std::string EncodeChatRequest(const ChatRequest& request) {
  Json messages = Json::array();
  for (const ChatMessage& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  Json j;
  j["model"] = request.model;
  j["messages"] = std::move(messages);
  j["temperature"] = request.temperature;
  return j.dump();
}

ChatRequest DecodeChatRequest(const std::string& body) {
  try {
    const Json j = Json::parse(body);
    ChatRequest r;
    r.model = j.at("model").get<std::string>();
    for (const Json& m : j.at("messages")) {
      r.messages.push_back(
          {m.at("role").get<std::string>(), m.at("content").get<std::string>()});
    }
    r.temperature = j.value("temperature", 0.0);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ResponseError(std::string("malformed chat request: ") + e.what(), body);
  }
}

std::string EncodeChatResponse(const std::string& content) {
  Json j;
  j["content"] = content;
  return j.dump();
}

std::string DecodeChatResponse(const std::string& body) {
  try {
    return Json::parse(body).at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ResponseError(std::string("malformed chat response: ") + e.what(), body);
  }
}

std::string LabelClient::Ask(const std::string& prompt) {
  ChatRequest request;
  request.model = model();
  request.messages.push_back({"user", prompt});
  request.temperature = 0.0;
  return Complete(request);
}

HttpLabelClient::HttpLabelClient(HttpClientOptions options)
    : options_(std::move(options)) {
  const std::string& url = options_.endpoint;
  const size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw Error("client endpoint must include a scheme: " + url);
  }
  const size_t slash = url.find('/', scheme + 3);
  scheme_host_port_ = url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
}

std::string HttpLabelClient::Complete(const ChatRequest& request) {
  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!options_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + options_.api_key);
  }
  const std::string body = EncodeChatRequest(request);

  std::string last_error = "no attempt made";
  auto backoff = options_.retry.initial_backoff;
  const int attempts = std::max(1, options_.retry.attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      try {
        return DecodeChatResponse(res->body);
      } catch (const ResponseError& e) {
        last_error = e.what();
      }
    } else {
      last_error = "HTTP status " + std::to_string(res->status);
      // Client errors other than rate limiting will not improve on retry.
      if (res->status >= 400 && res->status < 500 && res->status != 429) break;
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<int64_t>(backoff.count() * options_.retry.multiplier));
    }
  }
  throw ClientError("request to " + options_.endpoint + " failed: " + last_error);
}

}  // namespace playseg
