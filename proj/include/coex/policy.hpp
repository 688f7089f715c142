#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "coex/config.hpp"
#include "coex/epoch_optimizer.hpp"
#include "coex/types.hpp"

namespace coex {

/// Unvalidated knobs as proposed by a policy (typically parsed from an LLM).
struct RawPolicyProposal {
  std::optional<double> alpha;
  std::map<std::pair<int, Stack>, double> duty_caps;
  std::map<PriorityClass, double> class_weights;
  std::optional<std::string> rationale;

  friend bool operator==(const RawPolicyProposal&, const RawPolicyProposal&) = default;
};

enum class PolicySource { Rule, Llm, LlmFallback };
std::string_view to_string(PolicySource s) noexcept;
std::optional<PolicySource> parse_policy_source(std::string_view s) noexcept;

struct PolicyDecision {
  PolicyKnobs knobs;
  PolicySource source = PolicySource::Rule;
  std::optional<RawPolicyProposal> raw;
  std::optional<std::string> rationale;
  std::optional<std::string> fault;  // "<Kind>: <detail>" when the LLM path failed
};

/// A proposal that cannot be sanitized (no usable alpha, or no cap for any
/// known channel). Callers take the rule fallback path.
class CoercionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr PerClass<double> kDefaultClassWeights{{8.0, 3.0, 1.0, 0.5}};

/// Upper bound any cap on (c, s) may take: 1 - gamma * busy.
double headroom_cap(const ChannelState& c, Stack s, double gamma) noexcept;

/// Rule baseline caps and weights. Stack share is backlog-proportional,
/// clamped to [0.25, 0.75] (0.5/0.5 with no backlog), times the headroom.
/// Alpha is left at 0 for benevolent_alpha to fill in.
PolicyKnobs rule_policy(const std::vector<ChannelState>& channels, const std::vector<UserState>& users,
                        double gamma);

/// Sanitizes a proposal: alpha to the nearest of {0,1,2}; each cap clamped
/// to [0,1] and to the headroom; weights clamped to [0.1, 10]. Entries that
/// are missing or non-finite are taken from rule_policy for the same state.
PolicyKnobs coerce_policy(const RawPolicyProposal& raw, const std::vector<ChannelState>& channels,
                          const std::vector<UserState>& users, double gamma);

RawPolicyProposal to_raw_proposal(const PolicyKnobs& knobs);

/// Structural and range check of knobs against a channel set.
std::vector<std::string> validate_knobs(const PolicyKnobs& knobs, const std::vector<ChannelState>& channels,
                                        std::optional<double> gamma = std::nullopt);

using EpochSolver = std::function<AllocationResult(const std::vector<UserState>&, const std::vector<ChannelState>&,
                                                   const PolicyKnobs&)>;

/// Solver bound to the config's parameters.
EpochSolver make_epoch_solver(const SimConfig& cfg);

/// Alpha in {0,1,2} maximizing total served bits with caps and weights
/// fixed; ties go to the smaller alpha. Runs the solver on the given state
/// only; nothing is mutated and no randomness is consumed.
int benevolent_alpha(const std::vector<UserState>& users, const std::vector<ChannelState>& channels,
                     const PolicyKnobs& knobs, const EpochSolver& solver);

/// Rule baseline with benevolent alpha; source = Rule.
PolicyDecision decide_rule_policy(const std::vector<UserState>& users, const std::vector<ChannelState>& channels,
                                  const SimConfig& cfg);

}  // namespace coex
