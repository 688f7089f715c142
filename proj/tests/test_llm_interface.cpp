#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "coex/llm_interface.hpp"

namespace coex {
namespace {

using nlohmann::json;

SimConfig scenario() { return default_scenario(kModerateLoadBps, 2025); }

std::string policy_text(int alpha, double cap, double weight, const std::string& extra = "") {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                R"({"alpha": %d, "duty_caps": {"0": {"wifi": %g, "nru": %g}, "1": {"wifi": %g, "nru": %g}},)"
                R"( "class_weights": {"emergency": %g, "high": %g, "normal": %g, "bulk": %g}%s})",
                alpha, cap, cap, cap, cap, weight, weight, weight, weight, extra.c_str());
  return buf;
}

TEST(StateJson, ShapeAndUnits) {
  const SimConfig cfg = scenario();
  const auto doc = build_state_json(cfg.channels, cfg.users);
  EXPECT_EQ(doc["channels"].size(), 2u);
  EXPECT_EQ(doc["users"].size(), 28u);
  EXPECT_EQ(doc["channels"][0]["bw_mhz"], 160.0);
  EXPECT_EQ(doc["hints"]["alpha_choices"].dump(), "[0,1,2]");
  EXPECT_TRUE(state_schema().validate(json::parse(doc.dump())).empty());
}

TEST(StateJson, EmptyUsersStillValid) {
  const SimConfig cfg = scenario();
  const auto doc = build_state_json(cfg.channels, {});
  EXPECT_TRUE(doc["users"].is_array());
  EXPECT_TRUE(doc["users"].empty());
  EXPECT_TRUE(state_schema().validate(json::parse(doc.dump())).empty());
}

TEST(StateJson, DeadlineSecondsAndRounding) {
  SimConfig cfg = scenario();
  cfg.users.resize(1);
  cfg.users[0].latency_target_ms = 50;
  cfg.users[0].backlog_bits = 1234567.891;
  cfg.users[0].battery = 0.123456789;
  const auto doc = build_state_json(cfg.channels, cfg.users);
  EXPECT_EQ(doc["users"][0]["deadline_s"].get<double>(), 0.05);
  EXPECT_EQ(doc["users"][0]["backlog_bits"].get<double>(), 1234570.0);
  EXPECT_EQ(doc["users"][0]["battery_pct"].get<double>(), 12.3457);
}

TEST(SystemPrompt, MentionsObjectivesAndConstraints) {
  const std::string p(system_prompt());
  for (const char* word : {"latency", "energy", "fair", "alpha", "duty_caps", "class_weights"}) {
    EXPECT_NE(p.find(word), std::string::npos) << word;
  }
}

TEST(ParseReply, Passthrough) {
  const auto r = parse_policy_reply(policy_text(1, 0.5, 1, R"(, "rationale": "even")"));
  const auto* raw = std::get_if<RawPolicyProposal>(&r);
  ASSERT_NE(raw, nullptr);
  EXPECT_EQ(raw->alpha, 1.0);
  EXPECT_EQ(raw->duty_caps.size(), 4u);
  EXPECT_EQ(raw->duty_caps.at({1, Stack::NrU}), 0.5);
  EXPECT_EQ(raw->class_weights.at(PriorityClass::Bulk), 1.0);
  EXPECT_EQ(raw->rationale, "even");
}

TEST(ParseReply, Faults) {
  auto kind = [](const std::string& body) {
    const auto r = parse_policy_reply(body);
    const auto* f = std::get_if<PolicyFault>(&r);
    return f ? std::optional<FaultKind>(f->kind) : std::nullopt;
  };
  EXPECT_EQ(kind("not json"), FaultKind::ParseError);
  EXPECT_EQ(kind(R"({"alpha":"two"})"), FaultKind::SchemaViolation);
  EXPECT_EQ(kind(R"({"alpha":1,"duty_caps":{"x":{"wifi":0.1,"nru":0.1}},)"
                 R"("class_weights":{"emergency":1,"high":1,"normal":1,"bulk":1}})"),
            FaultKind::SchemaViolation);
  EXPECT_EQ(kind(policy_text(1, 0.5, 1, R"(, "per_user": {"3": 1})")), FaultKind::SchemaViolation);
  EXPECT_FALSE(kind(policy_text(3, 1.5, 50)));  // ranges are coerced, not rejected
}

TEST(MockTransport, ScriptCyclesAndTimeouts) {
  MockScriptTransport t({"a", "TIMEOUT"});
  const json state;
  EXPECT_EQ(std::get<std::string>(t.complete(state)), "a");
  EXPECT_EQ(std::get<PolicyFault>(t.complete(state)).kind, FaultKind::Timeout);
  EXPECT_EQ(std::get<std::string>(t.complete(state)), "a");
  EXPECT_EQ(t.calls(), 3u);
  MockScriptTransport empty({});
  EXPECT_EQ(std::get<PolicyFault>(empty.complete(state)).kind, FaultKind::Transport);
}

TEST(MockTransport, FromFileStripsCarriageReturns) {
  const auto path = std::filesystem::temp_directory_path() / "coex_mock_script.jsonl";
  {
    std::ofstream out(path, std::ios::binary);
    out << "first\r\nsecond\n";
  }
  auto t = MockScriptTransport::from_file(path);
  EXPECT_EQ(std::get<std::string>(t.complete({})), "first");
  EXPECT_EQ(std::get<std::string>(t.complete({})), "second");
  std::filesystem::remove(path);
}

TEST(DecidePolicy, ValidScriptIsLlm) {
  const SimConfig cfg = scenario();
  MockScriptTransport t({policy_text(1, 0.5, 1, R"(, "rationale": "r")")});
  const auto d = decide_policy(cfg.channels, cfg.users, t, cfg);
  EXPECT_EQ(d.source, PolicySource::Llm);
  EXPECT_EQ(d.knobs.alpha, 1);
  EXPECT_EQ(d.rationale, "r");
  EXPECT_FALSE(d.fault);
}

TEST(DecidePolicy, CapAboveOneIsClampedToHeadroom) {
  const SimConfig cfg = scenario();
  MockScriptTransport t({policy_text(2, 1.5, 1)});
  const auto d = decide_policy(cfg.channels, cfg.users, t, cfg);
  EXPECT_EQ(d.source, PolicySource::Llm);
  for (const auto& c : cfg.channels) {
    for (Stack s : kStacks) EXPECT_DOUBLE_EQ(d.knobs.cap(c.id, s), 1.0 - cfg.headroom_gamma * c.busy[s]);
  }
}

TEST(DecidePolicy, MalformedFallsBackToRule) {
  const SimConfig cfg = scenario();
  const auto rule = decide_rule_policy(cfg.users, cfg.channels, cfg);
  for (const std::string line : {"not json", R"({"alpha":"two"})", "TIMEOUT", R"({"alpha":1,"duty_caps":{},)"
                                 R"("class_weights":{"emergency":1,"high":1,"normal":1,"bulk":1}})"}) {
    MockScriptTransport t({line});
    const auto d = decide_policy(cfg.channels, cfg.users, t, cfg);
    EXPECT_EQ(d.source, PolicySource::LlmFallback) << line;
    EXPECT_EQ(d.knobs, rule.knobs) << line;
    ASSERT_TRUE(d.fault) << line;
  }
}

TEST(DecidePolicy, RationaleDoesNotChangeKnobs) {
  const SimConfig cfg = scenario();
  MockScriptTransport a({policy_text(1, 0.4, 2)});
  MockScriptTransport b({policy_text(1, 0.4, 2, R"(, "rationale": "prefer the quiet channel for urgent users")")});
  EXPECT_EQ(decide_policy(cfg.channels, cfg.users, a, cfg).knobs, decide_policy(cfg.channels, cfg.users, b, cfg).knobs);
}

TEST(ChatRequest, ResponseFormats) {
  LlmEndpointConfig ep;
  const auto state = build_state_json(scenario().channels, {});
  auto req = build_chat_request(ep, state);
  EXPECT_EQ(req["model"], "gpt-4o-mini");
  EXPECT_EQ(req["messages"][0]["role"], "system");
  EXPECT_EQ(req["messages"][1]["content"], state.dump());
  EXPECT_EQ(req["response_format"]["type"], "json_object");
  ep.mode = EndpointMode::SchemaMode;
  req = build_chat_request(ep, state);
  EXPECT_EQ(req["response_format"]["type"], "json_schema");
  EXPECT_EQ(req["response_format"]["json_schema"]["schema"]["required"].dump(), R"(["alpha","duty_caps","class_weights"])");
}

TEST(EndpointConfig, JsonRoundTripAndValidation) {
  LlmEndpointConfig ep;
  ep.mode = EndpointMode::Mock;
  EXPECT_FALSE(validate_endpoint_config(ep).empty());
  ep.mock_script_path = "/tmp/x.jsonl";
  EXPECT_TRUE(validate_endpoint_config(ep).empty());
  const auto back = endpoint_config_from_json(json::parse(to_json(ep).dump()));
  EXPECT_EQ(back.mode, EndpointMode::Mock);
  EXPECT_EQ(back.mock_script_path, ep.mock_script_path);
  EXPECT_THROW(endpoint_config_from_json(json::parse(R"({"mode": "grpc"})")), ConfigError);
  LlmEndpointConfig bad;
  bad.timeout_ms = 0;
  bad.base_url = "localhost";
  EXPECT_EQ(validate_endpoint_config(bad).size(), 2u);
}

class LocalServer : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = req.body;
      if (mode_ == "slow") std::this_thread::sleep_for(std::chrono::milliseconds(600));
      if (mode_ == "error") {
        res.status = 503;
        res.set_content("overloaded", "text/plain");
        return;
      }
      if (mode_ == "envelope") {
        res.set_content(R"({"choices": []})", "application/json");
        return;
      }
      json env;
      env["choices"] = json::array({{{"message", {{"role", "assistant"}, {"content", reply_}}}}});
      res.set_content(env.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  LlmEndpointConfig endpoint(int timeout_ms = 2000) {
    LlmEndpointConfig ep;
    ep.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    ep.api_key_env_var = "COEX_TEST_API_KEY";
    ep.timeout_ms = timeout_ms;
    return ep;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::string mode_ = "ok";
  std::string reply_;
  std::string last_auth_;
  std::string last_body_;
};

TEST_F(LocalServer, SuccessSendsBearerAndParses) {
  ::setenv("COEX_TEST_API_KEY", "sk-test", 1);
  reply_ = policy_text(2, 0.3, 1);
  ChatCompletionsTransport t(endpoint());
  const SimConfig cfg = scenario();
  const auto d = decide_policy(cfg.channels, cfg.users, t, cfg);
  EXPECT_EQ(d.source, PolicySource::Llm);
  EXPECT_EQ(d.knobs.alpha, 2);
  EXPECT_EQ(last_auth_, "Bearer sk-test");
  EXPECT_EQ(json::parse(last_body_)["response_format"]["type"], "json_object");
  ::unsetenv("COEX_TEST_API_KEY");
}

TEST_F(LocalServer, Timeout) {
  mode_ = "slow";
  ChatCompletionsTransport t(endpoint(200));
  const auto r = t.complete({});
  ASSERT_TRUE(std::holds_alternative<PolicyFault>(r));
  EXPECT_EQ(std::get<PolicyFault>(r).kind, FaultKind::Timeout);
}

TEST_F(LocalServer, HttpErrorIsTransportFault) {
  mode_ = "error";
  ChatCompletionsTransport t(endpoint());
  const auto f = std::get<PolicyFault>(t.complete({}));
  EXPECT_EQ(f.kind, FaultKind::Transport);
  EXPECT_EQ(f.raw_body, "overloaded");
  EXPECT_NE(f.describe().find("503"), std::string::npos);
}

TEST_F(LocalServer, BadEnvelopeIsParseError) {
  mode_ = "envelope";
  ChatCompletionsTransport t(endpoint());
  EXPECT_EQ(std::get<PolicyFault>(t.complete({})).kind, FaultKind::ParseError);
}

TEST(HttpTransport, UnreachableEndpointFallsBack) {
  LlmEndpointConfig ep;
  ep.base_url = "http://127.0.0.1:9/v1";
  ep.timeout_ms = 500;
  ChatCompletionsTransport t(ep);
  const SimConfig cfg = scenario();
  const auto d = decide_policy(cfg.channels, cfg.users, t, cfg);
  EXPECT_EQ(d.source, PolicySource::LlmFallback);
  EXPECT_EQ(d.knobs, decide_rule_policy(cfg.users, cfg.channels, cfg).knobs);
}

TEST(PolicyFault, DescribeTruncatesBody) {
  PolicyFault f{FaultKind::ParseError, "bad", std::string(600, 'x')};
  const auto s = f.describe(10);
  EXPECT_EQ(s, "ParseError: bad | body: xxxxxxxxxx...");
}

}  // namespace
}  // namespace coex
