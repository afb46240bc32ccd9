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

#ifndef PLAYSEG_LABEL_CLIENT_H_
#define PLAYSEG_LABEL_CLIENT_H_

#include <chrono>
#include <functional>
#include <string>
#include <vector>

namespace playseg {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
};

// Wire format: request {"model", "messages": [{"role","content"}],
// "temperature"}; response {"content"}.
std::string EncodeChatRequest(const ChatRequest& request);
ChatRequest DecodeChatRequest(const std::string& body);
std::string EncodeChatResponse(const std::string& content);
std::string DecodeChatResponse(const std::string& body);

// A language model endpoint. Implementations must tolerate concurrent calls.
class LabelClient {
 public:
  virtual ~LabelClient() = default;
  // Returns the model's text reply. Throws ClientError once retries are
  // exhausted.
  virtual std::string Complete(const ChatRequest& request) = 0;
  virtual std::string model() const = 0;

  // Single user-turn convenience wrapper at temperature 0.
  std::string Ask(const std::string& prompt);
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{250};
  double multiplier = 2.0;
};

struct HttpClientOptions {
  // e.g. "http://localhost:8080/v1/chat"
  std::string endpoint;
  std::string model = "default";
  std::chrono::milliseconds timeout{60000};
  RetryPolicy retry;
  // Sent as a bearer token when non-empty.
  std::string api_key;
};

// Name of the environment variable holding client credentials.
inline constexpr char kApiKeyEnv[] = "PLAYSEG_API_KEY";

class HttpLabelClient : public LabelClient {
 public:
  explicit HttpLabelClient(HttpClientOptions options);

  std::string Complete(const ChatRequest& request) override;
  std::string model() const override { return options_.model; }

 private:
  HttpClientOptions options_;
  std::string scheme_host_port_;
  std::string path_;
};

// Offline client answering through a callback; deterministic when the
// callback is.
class CallbackClient : public LabelClient {
 public:
  using Handler = std::function<std::string(const ChatRequest&)>;
  CallbackClient(std::string model, Handler handler)
      : model_(std::move(model)), handler_(std::move(handler)) {}

  std::string Complete(const ChatRequest& request) override {
    return handler_(request);
  }
  std::string model() const override { return model_; }

 private:
  std::string model_;
  Handler handler_;
};

}  // namespace playseg

#endif  // PLAYSEG_LABEL_CLIENT_H_
