#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "coex/config.hpp"
#include "coex/json_schema.hpp"
#include "coex/policy.hpp"
#include "coex/types.hpp"

namespace coex {

enum class EndpointMode { JsonMode, SchemaMode, Mock };
std::string_view to_string(EndpointMode m) noexcept;

struct LlmEndpointConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model_name = "gpt-4o-mini";
  std::string api_key_env_var = "OPENAI_API_KEY";
  int timeout_ms = 10000;
  EndpointMode mode = EndpointMode::JsonMode;
  std::optional<std::filesystem::path> mock_script_path;
};

std::vector<std::string> validate_endpoint_config(const LlmEndpointConfig& ep);
/// Keys: base_url, model_name, api_key_env_var, timeout_ms,
/// mode ("json" | "schema" | "mock"), mock_script_path.
LlmEndpointConfig endpoint_config_from_json(const nlohmann::json& j);
LlmEndpointConfig load_endpoint_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const LlmEndpointConfig& ep);

/// Telemetry document: {channels: [...], users: [...], hints: {alpha_choices}}.
/// Key order is fixed and reals carry at most 6 significant digits.
nlohmann::ordered_json build_state_json(const std::vector<ChannelState>& channels,
                                        const std::vector<UserState>& users);

const JsonSchema& policy_schema();
const JsonSchema& state_schema();
std::string_view system_prompt() noexcept;

enum class FaultKind { Timeout, Transport, SchemaViolation, ParseError };
std::string_view to_string(FaultKind k) noexcept;

struct PolicyFault {
  FaultKind kind = FaultKind::Transport;
  std::string message;
  std::string raw_body;

  /// "<Kind>: <message>", followed by the (truncated) raw body when present.
  std::string describe(std::size_t max_body = 512) const;
};

using PolicyReply = std::variant<RawPolicyProposal, PolicyFault>;

/// Parses the assistant's JSON text against the policy schema (structural
/// mode) into a raw proposal.
PolicyReply parse_policy_reply(const std::string& body);

/// Where the policy text comes from. A transport returns the assistant
/// message content or a fault; it never throws.
class PolicyTransport {
 public:
  virtual ~PolicyTransport() = default;
  virtual std::variant<std::string, PolicyFault> complete(const nlohmann::ordered_json& state) = 0;
};

/// Replays a JSONL script: call k returns line k (cycling once exhausted).
/// A line reading TIMEOUT produces a Timeout fault.
class MockScriptTransport final : public PolicyTransport {
 public:
  explicit MockScriptTransport(std::vector<std::string> lines);
  static MockScriptTransport from_file(const std::filesystem::path& path);

  std::variant<std::string, PolicyFault> complete(const nlohmann::ordered_json& state) override;
  std::size_t calls() const noexcept { return calls_; }

 private:
  std::vector<std::string> lines_;
  std::size_t calls_ = 0;
};

/// OpenAI-compatible POST {base_url}/chat/completions.
class ChatCompletionsTransport final : public PolicyTransport {
 public:
  explicit ChatCompletionsTransport(LlmEndpointConfig ep);
  std::variant<std::string, PolicyFault> complete(const nlohmann::ordered_json& state) override;

 private:
  LlmEndpointConfig ep_;
};

/// Request payload: system prompt + state as the user message, with a
/// response_format of json_object (JsonMode) or json_schema (SchemaMode).
nlohmann::ordered_json build_chat_request(const LlmEndpointConfig& ep, const nlohmann::ordered_json& state);

std::unique_ptr<PolicyTransport> make_transport(const LlmEndpointConfig& ep);

PolicyReply request_policy(const nlohmann::ordered_json& state, PolicyTransport& transport);

/// Total: any fault or coercion failure yields the rule baseline (with
/// benevolent alpha) tagged LlmFallback.
PolicyDecision decide_policy(const std::vector<ChannelState>& channels, const std::vector<UserState>& users,
                             PolicyTransport& transport, const SimConfig& cfg);

}  // namespace coex
