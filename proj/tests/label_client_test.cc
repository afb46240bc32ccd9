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

#include <atomic>
#include <chrono>
#include <string>
#include <thread>

#include <gtest/gtest.h>

#include "httplib.h"
#include "playseg/error.h"
#include "playseg/label_client.h"

namespace playseg {
namespace {

TEST(WireFormatTest, RequestRoundTrip) {
  ChatRequest r;
  r.model = "m1";
  r.messages = {{"system", "be brief"}, {"user", "line one\n\"quoted\""}};
  const ChatRequest back = DecodeChatRequest(EncodeChatRequest(r));
  EXPECT_EQ(back.model, "m1");
  ASSERT_EQ(back.messages.size(), 2u);
  EXPECT_EQ(back.messages[1].content, "line one\n\"quoted\"");
  EXPECT_EQ(back.temperature, 0.0);
  EXPECT_EQ(DecodeChatResponse(EncodeChatResponse("hi {there}")), "hi {there}");
  EXPECT_THROW(DecodeChatResponse("{\"text\":1}"), ResponseError);
}

// Local chat endpoint that fails the first `failures` requests with `status`.
class FakeEndpoint {
 public:
  FakeEndpoint(int failures, int status) : failures_(failures), status_(status) {
    server_.Post("/v1/chat", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = ++calls_;
      last_auth_ = req.get_header_value("Authorization");
      if (n <= failures_) {
        res.status = status_;
        return;
      }
      const ChatRequest chat = DecodeChatRequest(req.body);
      res.set_content(EncodeChatResponse("echo: " + chat.messages.back().content), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  HttpClientOptions Options() const {
    HttpClientOptions o;
    o.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat";
    o.model = "fake";
    o.timeout = std::chrono::milliseconds(5000);
    o.retry.initial_backoff = std::chrono::milliseconds(1);
    return o;
  }
  int calls() const { return calls_; }
  std::string last_auth() const { return last_auth_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  int failures_;
  int status_;
  std::atomic<int> calls_{0};
  std::string last_auth_;
};

TEST(HttpLabelClientTest, AnswersAndSendsKey) {
  FakeEndpoint ep(0, 200);
  HttpClientOptions o = ep.Options();
  o.api_key = "sekret";
  HttpLabelClient client(o);
  EXPECT_EQ(client.Ask("hello"), "echo: hello");
  EXPECT_EQ(ep.last_auth(), "Bearer sekret");
  EXPECT_EQ(client.model(), "fake");
}

TEST(HttpLabelClientTest, RetriesServerErrors) {
  FakeEndpoint ep(2, 503);
  HttpLabelClient client(ep.Options());
  EXPECT_EQ(client.Ask("x"), "echo: x");
  EXPECT_EQ(ep.calls(), 3);
}

TEST(HttpLabelClientTest, GivesUpAfterAttempts) {
  FakeEndpoint ep(10, 500);
  HttpLabelClient client(ep.Options());
  EXPECT_THROW(client.Ask("x"), ClientError);
  EXPECT_EQ(ep.calls(), 3);
}

TEST(HttpLabelClientTest, ClientErrorsAreNotRetried) {
  FakeEndpoint ep(10, 401);
  HttpLabelClient client(ep.Options());
  EXPECT_THROW(client.Ask("x"), ClientError);
  EXPECT_EQ(ep.calls(), 1);
}

TEST(HttpLabelClientTest, UnreachableEndpoint) {
  HttpClientOptions o;
  o.endpoint = "http://127.0.0.1:1/v1/chat";
  o.timeout = std::chrono::milliseconds(200);
  o.retry.attempts = 2;
  o.retry.initial_backoff = std::chrono::milliseconds(1);
  HttpLabelClient client(o);
  EXPECT_THROW(client.Ask("x"), ClientError);
  EXPECT_THROW(HttpLabelClient(HttpClientOptions{}), Error);
}

}  // namespace
}  // namespace playseg
