#pragma once

// Deterministic single-epoch solver.
//
// Stage 1 binds each user to at most one channel by a probe-airtime utility
// density. Stage 2 splits each (channel, stack) duty cap in two passes:
// urgent minimum grants, then a weighted alpha-fair split of the residual
// with backlog saturation handled by progressive filling. Losses are then
// realized from the final aggregate duties.

#include <map>
#include <optional>
#include <vector>

#include "coex/config.hpp"
#include "coex/link_model.hpp"
#include "coex/types.hpp"

namespace coex {

struct SolverParams {
  double delta_s = 0.1;
  double probe_duty = 0.05;
  double epsilon_served = 1.0;
  SpectralEfficiencyTable se_table;
  PowerProfile power_profile;
};

SolverParams solver_params(const SimConfig& cfg);

/// beta(B) = 1 - B.
double battery_penalty(double battery) noexcept;
/// 1.5 for latency targets up to 50 ms, 1.0 otherwise.
double latency_multiplier(double latency_target_ms) noexcept;
/// theta_i = w_k / (0.5 + beta(B_i)).
double base_weight(const UserState& u, const PolicyKnobs& knobs) noexcept;
/// Emergency or High priority, or latency target of at most 50 ms.
bool is_urgent(const UserState& u) noexcept;

/// min(Q / delta, Q / (D / 1000)) in bits/s.
double sla_required_rate(double backlog_bits, double delta_s, double latency_ms) noexcept;

/// Utility density of user `u` on `c` at probe duty tau0, with the stack's
/// loss evaluated at `committed_stack_duty + tau0`. nullopt when the user has
/// zero spectral efficiency (ineligible).
std::optional<double> utility_density(const UserState& u, const ChannelState& c, const PolicyKnobs& knobs,
                                      double committed_stack_duty, const SolverParams& params);

/// user id -> channel id. Users absent from the map are unassigned.
using Assignment = std::map<int, int>;

/// Sequential greedy: users sorted by descending class weight, then
/// descending SLA rate, then ascending id; each takes the channel with the
/// highest utility density given the probe duties committed so far (ties to
/// the lower channel id), then commits one probe duty on that channel.
Assignment assign_channels(const std::vector<UserState>& users, const std::vector<ChannelState>& channels,
                           const PolicyKnobs& knobs, const SolverParams& params);

struct MemberDuty {
  int user_id = 0;
  double urgent_duty = 0.0;
  double fair_duty = 0.0;
  double urgent_served_bits = 0.0;  // expected bits from the urgent grant
  double omega = 0.0;               // alpha-fair weight used in the residual split
  bool saturated = false;           // fair share was capped by remaining backlog

  double duty() const noexcept { return urgent_duty + fair_duty; }
};

struct StackAllocation {
  std::vector<MemberDuty> members;  // same order as the input members
  double total_duty() const noexcept;
};

/// Splits `cap` among `members` (all users of one stack assigned to
/// `channel`). Throws std::invalid_argument when cap is outside [0,1].
StackAllocation allocate_within_channel(const std::vector<UserState>& members, Stack stack, double cap,
                                        const PolicyKnobs& knobs, const ChannelState& channel,
                                        const SolverParams& params);

struct UserAllocation {
  int user_id = 0;
  std::optional<int> channel_id;
  double duty = 0.0;
  double goodput_bps = 0.0;
  double served_bits = 0.0;
  double energy_j = 0.0;
  double sla_required_bps = 0.0;
  bool sla_hit = false;
};

struct StackChannelOutcome {
  int channel_id = 0;
  Stack stack = Stack::WiFi;
  double cap = 0.0;
  double aggregate_duty = 0.0;
  double loss = 0.0;
};

struct AllocationResult {
  std::vector<UserAllocation> users;              // aligned with the input users
  std::vector<StackChannelOutcome> stack_channels;  // channel order, WiFi then NrU

  double total_served_bits() const noexcept;
  double total_energy_j() const noexcept;
};

/// Full two-stage solve. Pure: inputs are not modified.
AllocationResult solve_epoch(const std::vector<UserState>& users, const std::vector<ChannelState>& channels,
                             const PolicyKnobs& knobs, const SolverParams& params);
AllocationResult solve_epoch(const std::vector<UserState>& users, const std::vector<ChannelState>& channels,
                             const PolicyKnobs& knobs, const SimConfig& cfg);

struct EpochTotals {
  double served_bits = 0.0;
  double energy_j = 0.0;
  double sla_hit_rate = 1.0;             // hits / |U|
  double sla_hit_rate_backlogged = 1.0;  // hits among users with backlog > 0
  int alpha = 0;
};

EpochTotals epoch_metrics(const AllocationResult& res, const std::vector<UserState>& users, int alpha);

}  // namespace coex
