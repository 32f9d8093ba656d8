#include <memory>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "tonecraft/service.hpp"

namespace {

using namespace tonecraft;
using namespace tonecraft::service;

std::shared_ptr<const neural::LoadedModel> tiny_model() {
  const std::vector<std::string> regular{"my", "wifi", "not", "working", "sorry", "!", "please", "help", "<sep>"};
  auto m = std::make_shared<neural::LoadedModel>();
  m->vocabulary = corpus::Vocabulary::from_tokens(regular);
  m->config = {m->vocabulary.size(), 4, 6, 6};
  m->params = neural::init_params(m->config, 3, 0.8);
  m->id = neural::checkpoint_id(m->config, m->vocabulary, m->params);
  return m;
}

const char* kWifi = R"({"conversation":[{"role":"user","text":"my wifi not working"}],"tone":"passionate"})";

TEST(Api, RespondShape) {
  const auto m = tiny_model();
  const auto r = handle_respond(m.get(), kWifi);
  ASSERT_EQ(r.status, 200) << r.body.dump();
  ASSERT_EQ(r.body["responses"].size(), 1u);
  EXPECT_EQ(r.body["responses"][0]["tone"], "passionate");
  EXPECT_TRUE(r.body["responses"][0]["text"].is_string());
  const auto reason = r.body["responses"][0]["stop_reason"].get<std::string>();
  EXPECT_TRUE(reason == "end_token" || reason == "max_steps");
  EXPECT_EQ(r.body["model"], m->id);
  EXPECT_GE(r.body["elapsed_ms"].get<double>(), 0.0);
}

TEST(Api, RespondAllOrderAndSharedEncoding) {
  const auto m = tiny_model();
  const auto body = R"({"conversation":[{"role":"user","text":"help"},{"role":"agent","text":"sorry"},{"role":"user","text":"my WIFI!"}]})";
  const auto r = handle_respond_all(m.get(), body);
  ASSERT_EQ(r.status, 200) << r.body.dump();
  ASSERT_EQ(r.body["responses"].size(), 3u);
  EXPECT_EQ(r.body["responses"][0]["tone"], "empathetic");
  EXPECT_EQ(r.body["responses"][1]["tone"], "neutral");
  EXPECT_EQ(r.body["responses"][2]["tone"], "passionate");
  // each entry equals the single-tone answer for the same context
  for (const char* t : {"empathetic", "neutral", "passionate"}) {
    auto single = nlohmann::json::parse(body);
    single["tone"] = t;
    const auto one = handle_respond(m.get(), single.dump());
    for (const auto& e : r.body["responses"])
      if (e["tone"] == t) EXPECT_EQ(e["text"], one.body["responses"][0]["text"]);
  }
  EXPECT_EQ(handle_respond_all(m.get(), body).body["responses"], r.body["responses"]);
}

TEST(Api, ClientErrors) {
  const auto m = tiny_model();
  auto r = handle_respond(m.get(), R"({"conversation":[{"role":"user","text":"hi"}],"tone":"angry"})");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["error"]["code"], "unknown_tone");
  EXPECT_NE(r.body["error"]["message"].get<std::string>().find("empathetic|neutral|passionate"), std::string::npos);
  r = handle_respond(m.get(), R"({"conversation":[{"role":"user","text":"hi"},{"role":"agent","text":"yo"}],"tone":"neutral"})");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["error"]["code"], "invalid_conversation");
  for (const char* bad : {"not json", "[]", R"({"conversation":"x"})", R"({"conversation":[{"role":"user"}]})",
                          R"({"conversation":[]})"}) {
    r = handle_respond_all(m.get(), bad);
    EXPECT_EQ(r.status, 400) << bad;
    EXPECT_TRUE(r.body["error"]["code"].is_string()) << bad;
  }
  r = handle_respond(m.get(), R"({"conversation":[{"role":"user","text":"hi"}]})");
  EXPECT_EQ(r.status, 400);
  r = handle_respond(m.get(), R"({"conversation":[{"role":"user","text":"@someone"}],"tone":"neutral"})");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["error"]["code"], "empty_context");
}

TEST(Api, NoCheckpointAndHealth) {
  EXPECT_EQ(handle_respond(nullptr, kWifi).status, 503);
  EXPECT_EQ(handle_respond(nullptr, kWifi).body["error"]["code"], "no_checkpoint");
  EXPECT_EQ(handle_health(nullptr).body, nlohmann::json::parse(R"({"status":"ok","checkpoint":null})"));
  const auto m = tiny_model();
  EXPECT_EQ(handle_health(m.get()).body["checkpoint"], m->id);
}

TEST(Http, EndpointsMethodsAndConcurrency) {
  const auto m = tiny_model();
  Server server(m);
  const int port = server.start_background();
  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(nlohmann::json::parse(health->body)["checkpoint"], m->id);
  auto wrong = client.Post("/v1/health", "{}", "application/json");
  ASSERT_TRUE(wrong);
  EXPECT_EQ(wrong->status, 405);
  EXPECT_EQ(nlohmann::json::parse(wrong->body)["error"]["code"], "method_not_allowed");
  auto missing = client.Get("/v2/nothing");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(nlohmann::json::parse(missing->body)["error"]["code"], "not_found");

  const auto expected = handle_respond(m.get(), kWifi).body["responses"];
  std::vector<std::thread> threads;
  std::vector<nlohmann::json> got(16);
  for (std::size_t i = 0; i < got.size(); ++i)
    threads.emplace_back([&, i] {
      httplib::Client c("127.0.0.1", port);
      if (auto res = c.Post("/v1/respond", kWifi, "application/json"); res && res->status == 200)
        got[i] = nlohmann::json::parse(res->body)["responses"];
    });
  for (auto& t : threads) t.join();
  for (const auto& g : got) EXPECT_EQ(g, expected);
  server.stop();
}

TEST(Http, ServerWithoutModel) {
  Server server;
  const int port = server.start_background();
  httplib::Client client("127.0.0.1", port);
  auto res = client.Post("/v1/respond_all", kWifi, "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 503);
  EXPECT_EQ(nlohmann::json::parse(client.Get("/v1/health")->body)["checkpoint"], nullptr);
}

}  // namespace
