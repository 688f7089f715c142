#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coex/config.hpp"
#include "coex/epoch_optimizer.hpp"
#include "coex/llm_interface.hpp"
#include "coex/policy.hpp"

namespace coex {

enum class PolicyMode { Rule, Llm, Mock };
std::string_view to_string(PolicyMode m) noexcept;
std::optional<PolicyMode> parse_policy_mode(std::string_view s) noexcept;

struct EpochRecord {
  int epoch = 0;  // 1-based
  PolicySource policy_source = PolicySource::Rule;
  int alpha = 0;
  double served_bits = 0.0;
  double energy_j = 0.0;
  double sla_hit_rate = 0.0;
  double sla_hit_rate_backlogged = 0.0;
  double cum_bits = 0.0;
  double cum_energy_j = 0.0;
  double cum_bits_per_joule = 0.0;
  std::map<int, PerStack<double>> duty_caps;
  PerClass<double> class_weights{};
  std::optional<std::string> fault;
  std::optional<std::string> rationale;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

/// Per-user queue bookkeeping over a run.
struct UserLedger {
  int user_id = 0;
  double initial_backlog = 0.0;
  double total_arrivals = 0.0;
  double total_served = 0.0;
  double final_backlog = 0.0;
};

/// State seen by the policy in one epoch (after jitter and arrivals).
struct EpochSnapshot {
  int epoch = 0;
  const std::vector<UserState>& users;
  const std::vector<ChannelState>& channels;
  const PolicyDecision& decision;
  const AllocationResult& result;
};

using EpochObserver = std::function<void(const EpochSnapshot&)>;

struct RunResult {
  std::vector<EpochRecord> records;
  std::vector<UserLedger> ledger;
  std::vector<UserState> final_users;
  std::vector<ChannelState> final_channels;
  std::uint64_t rng_draws = 0;
};

/// Epoch loop: step_env -> draw_arrivals -> enqueue -> policy -> solve ->
/// record -> queue update. `transport` is required for Llm and Mock modes.
/// Throws ConfigError on an invalid config.
RunResult run_multi_epoch(const SimConfig& cfg, PolicyMode mode, PolicyTransport* transport = nullptr,
                          const EpochObserver& observer = {});

/// Convenience overload that builds the transport from an endpoint config.
RunResult run_multi_epoch(const SimConfig& cfg, PolicyMode mode, const std::optional<LlmEndpointConfig>& endpoint,
                          const EpochObserver& observer = {});

}  // namespace coex
