#include "coex/llm_interface.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "coex/embedded_resources.hpp"

namespace coex {
namespace {

double six_significant(double x) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return std::strtod(buf, nullptr);
}

}  // namespace

std::string_view to_string(EndpointMode m) noexcept {
  switch (m) {
    case EndpointMode::JsonMode: return "json";
    case EndpointMode::SchemaMode: return "schema";
    case EndpointMode::Mock: return "mock";
  }
  return "json";
}

std::string_view to_string(FaultKind k) noexcept {
  switch (k) {
    case FaultKind::Timeout: return "Timeout";
    case FaultKind::Transport: return "Transport";
    case FaultKind::SchemaViolation: return "SchemaViolation";
    case FaultKind::ParseError: return "ParseError";
  }
  return "Transport";
}

std::string PolicyFault::describe(std::size_t max_body) const {
  std::string out = std::string(to_string(kind)) + ": " + message;
  if (!raw_body.empty()) {
    out += " | body: ";
    out += raw_body.size() > max_body ? raw_body.substr(0, max_body) + "..." : raw_body;
  }
  return out;
}

std::vector<std::string> validate_endpoint_config(const LlmEndpointConfig& ep) {
  std::vector<std::string> out;
  if (ep.timeout_ms <= 0) out.push_back("timeout_ms must be > 0");
  if (ep.mode == EndpointMode::Mock && !ep.mock_script_path) out.push_back("mock mode requires mock_script_path");
  if (ep.mode != EndpointMode::Mock && ep.base_url.find("://") == std::string::npos) {
    out.push_back("base_url must include a scheme");
  }
  return out;
}

LlmEndpointConfig endpoint_config_from_json(const nlohmann::json& j) {
  LlmEndpointConfig ep;
  try {
    if (j.contains("base_url")) ep.base_url = j.at("base_url").get<std::string>();
    if (j.contains("model_name")) ep.model_name = j.at("model_name").get<std::string>();
    if (j.contains("api_key_env_var")) ep.api_key_env_var = j.at("api_key_env_var").get<std::string>();
    if (j.contains("timeout_ms")) ep.timeout_ms = j.at("timeout_ms").get<int>();
    if (j.contains("mode")) {
      const auto mode = j.at("mode").get<std::string>();
      if (mode == "json") ep.mode = EndpointMode::JsonMode;
      else if (mode == "schema") ep.mode = EndpointMode::SchemaMode;
      else if (mode == "mock") ep.mode = EndpointMode::Mock;
      else throw ConfigError("endpoint mode must be json, schema or mock; got \"" + mode + "\"");
    }
    if (j.contains("mock_script_path") && !j["mock_script_path"].is_null()) {
      ep.mock_script_path = j.at("mock_script_path").get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("endpoint config: ") + e.what());
  }
  return ep;
}

LlmEndpointConfig load_endpoint_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open endpoint config " + path.string());
  try {
    return endpoint_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

nlohmann::ordered_json to_json(const LlmEndpointConfig& ep) {
  nlohmann::ordered_json j;
  j["base_url"] = ep.base_url;
  j["model_name"] = ep.model_name;
  j["api_key_env_var"] = ep.api_key_env_var;
  j["timeout_ms"] = ep.timeout_ms;
  j["mode"] = to_string(ep.mode);
  j["mock_script_path"] = ep.mock_script_path ? nlohmann::ordered_json(ep.mock_script_path->string())
                                              : nlohmann::ordered_json(nullptr);
  return j;
}

nlohmann::ordered_json build_state_json(const std::vector<ChannelState>& channels,
                                        const std::vector<UserState>& users) {
  nlohmann::ordered_json doc;
  doc["channels"] = nlohmann::ordered_json::array();
  for (const auto& c : channels) {
    nlohmann::ordered_json jc;
    jc["id"] = c.id;
    jc["bw_mhz"] = six_significant(c.bandwidth_hz / 1e6);
    jc["busy_wifi"] = six_significant(c.busy[Stack::WiFi]);
    jc["busy_nru"] = six_significant(c.busy[Stack::NrU]);
    jc["lbt_fail_wifi"] = six_significant(c.lbt_fail_base[Stack::WiFi]);
    jc["lbt_fail_nru"] = six_significant(c.lbt_fail_base[Stack::NrU]);
    doc["channels"].push_back(std::move(jc));
  }
  doc["users"] = nlohmann::ordered_json::array();
  for (const auto& u : users) {
    nlohmann::ordered_json ju;
    ju["id"] = u.id;
    ju["tech"] = to_string(u.stack);
    ju["cqi"] = u.cqi;
    ju["backlog_bits"] = six_significant(u.backlog_bits);
    ju["deadline_s"] = six_significant(u.latency_target_ms / 1000.0);
    ju["battery_pct"] = six_significant(u.battery * 100.0);
    ju["priority"] = to_string(u.priority);
    ju["power_mode"] = to_string(u.power_mode);
    doc["users"].push_back(std::move(ju));
  }
  doc["hints"] = {{"alpha_choices", {0, 1, 2}}};
  return doc;
}

const JsonSchema& policy_schema() {
  static const JsonSchema schema = JsonSchema::parse(resources::kPolicySchema);
  return schema;
}

const JsonSchema& state_schema() {
  static const JsonSchema schema = JsonSchema::parse(resources::kStateSchema);
  return schema;
}

std::string_view system_prompt() noexcept { return resources::kSystemPrompt; }

PolicyReply parse_policy_reply(const std::string& body) {
  nlohmann::json j = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return PolicyFault{FaultKind::ParseError, "reply is not valid JSON", body};

  const auto errors = policy_schema().validate(j, JsonSchema::Mode::Structural);
  if (!errors.empty()) return PolicyFault{FaultKind::SchemaViolation, errors.front(), body};

  RawPolicyProposal raw;
  raw.alpha = j["alpha"].get<double>();
  for (const auto& [key, caps] : j["duty_caps"].items()) {
    int channel_id = 0;
    const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), channel_id);
    if (key.empty() || ec != std::errc() || ptr != key.data() + key.size()) {
      return PolicyFault{FaultKind::SchemaViolation, "/duty_caps/" + key + ": channel key is not an integer id", body};
    }
    for (Stack s : kStacks) raw.duty_caps[{channel_id, s}] = caps[std::string(to_string(s))].get<double>();
  }
  for (PriorityClass k : kPriorityClasses) {
    raw.class_weights[k] = j["class_weights"][std::string(to_string(k))].get<double>();
  }
  if (j.contains("rationale")) raw.rationale = j["rationale"].get<std::string>();
  return raw;
}

MockScriptTransport::MockScriptTransport(std::vector<std::string> lines) : lines_(std::move(lines)) {}

MockScriptTransport MockScriptTransport::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open mock script " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return MockScriptTransport(std::move(lines));
}

std::variant<std::string, PolicyFault> MockScriptTransport::complete(const nlohmann::ordered_json&) {
  const std::size_t k = calls_++;
  if (lines_.empty()) return PolicyFault{FaultKind::Transport, "mock script is empty", ""};
  const std::string& line = lines_[k % lines_.size()];
  if (line == "TIMEOUT") return PolicyFault{FaultKind::Timeout, "scripted timeout", ""};
  return line;
}

nlohmann::ordered_json build_chat_request(const LlmEndpointConfig& ep, const nlohmann::ordered_json& state) {
  nlohmann::ordered_json req;
  req["model"] = ep.model_name;
  req["messages"] = nlohmann::ordered_json::array({
      {{"role", "system"}, {"content", std::string(system_prompt())}},
      {{"role", "user"}, {"content", state.dump()}},
  });
  if (ep.mode == EndpointMode::SchemaMode) {
    req["response_format"] = {
        {"type", "json_schema"},
        {"json_schema", {{"name", "spectrum_policy"}, {"schema", nlohmann::ordered_json::parse(resources::kPolicySchema)}, {"strict", false}}}};
  } else {
    req["response_format"] = {{"type", "json_object"}};
  }
  return req;
}

std::unique_ptr<PolicyTransport> make_transport(const LlmEndpointConfig& ep) {
  if (ep.mode == EndpointMode::Mock) {
    if (!ep.mock_script_path) throw ConfigError("mock mode requires mock_script_path");
    return std::make_unique<MockScriptTransport>(MockScriptTransport::from_file(*ep.mock_script_path));
  }
  return std::make_unique<ChatCompletionsTransport>(ep);
}

PolicyReply request_policy(const nlohmann::ordered_json& state, PolicyTransport& transport) {
  auto reply = transport.complete(state);
  if (auto* fault = std::get_if<PolicyFault>(&reply)) return std::move(*fault);
  return parse_policy_reply(std::get<std::string>(reply));
}

PolicyDecision decide_policy(const std::vector<ChannelState>& channels, const std::vector<UserState>& users,
                             PolicyTransport& transport, const SimConfig& cfg) {
  PolicyReply reply = request_policy(build_state_json(channels, users), transport);

  std::optional<std::string> fault;
  std::optional<RawPolicyProposal> raw;
  if (auto* proposal = std::get_if<RawPolicyProposal>(&reply)) {
    raw = *proposal;
    try {
      PolicyDecision d;
      d.knobs = coerce_policy(*proposal, channels, users, cfg.headroom_gamma);
      d.source = PolicySource::Llm;
      d.raw = raw;
      d.rationale = proposal->rationale;
      return d;
    } catch (const CoercionError& e) {
      fault = std::string("Coercion: ") + e.what();
    }
  } else {
    fault = std::get<PolicyFault>(reply).describe();
  }

  PolicyDecision d = decide_rule_policy(users, channels, cfg);
  d.source = PolicySource::LlmFallback;
  d.raw = raw;
  if (raw) d.rationale = raw->rationale;
  d.fault = fault;
  return d;
}

}  // namespace coex
