#include "coex/policy.hpp"

#include <algorithm>
#include <cmath>

namespace coex {

std::string_view to_string(PolicySource s) noexcept {
  switch (s) {
    case PolicySource::Rule: return "rule";
    case PolicySource::Llm: return "llm";
    case PolicySource::LlmFallback: return "llm_fallback";
  }
  return "rule";
}

std::optional<PolicySource> parse_policy_source(std::string_view s) noexcept {
  for (PolicySource v : {PolicySource::Rule, PolicySource::Llm, PolicySource::LlmFallback}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

double headroom_cap(const ChannelState& c, Stack s, double gamma) noexcept {
  return 1.0 - gamma * c.busy[s];
}

PolicyKnobs rule_policy(const std::vector<ChannelState>& channels, const std::vector<UserState>& users,
                        double gamma) {
  PerStack<double> load{};
  for (const auto& u : users) load[u.stack] += u.backlog_bits;
  const double total = load[Stack::WiFi] + load[Stack::NrU];

  PerStack<double> share{{0.5, 0.5}};
  if (total > 0.0) {
    for (Stack s : kStacks) share[s] = std::clamp(load[s] / total, 0.25, 0.75);
  }

  PolicyKnobs knobs;
  knobs.alpha = 0;
  knobs.class_weights = kDefaultClassWeights;
  for (const auto& c : channels) {
    PerStack<double> caps{};
    for (Stack s : kStacks) caps[s] = headroom_cap(c, s, gamma) * share[s];
    knobs.duty_caps[c.id] = caps;
  }
  return knobs;
}

PolicyKnobs coerce_policy(const RawPolicyProposal& raw, const std::vector<ChannelState>& channels,
                          const std::vector<UserState>& users, double gamma) {
  if (!raw.alpha || !std::isfinite(*raw.alpha)) throw CoercionError("proposal has no numeric alpha");

  bool any_cap = false;
  for (const auto& c : channels) {
    for (Stack s : kStacks) {
      auto it = raw.duty_caps.find({c.id, s});
      if (it != raw.duty_caps.end() && std::isfinite(it->second)) any_cap = true;
    }
  }
  if (!any_cap) throw CoercionError("proposal has no usable duty caps");

  const PolicyKnobs defaults = rule_policy(channels, users, gamma);
  PolicyKnobs knobs;
  knobs.alpha = static_cast<int>(std::lround(std::clamp(*raw.alpha, 0.0, 2.0)));

  for (const auto& c : channels) {
    PerStack<double> caps = defaults.duty_caps.at(c.id);
    for (Stack s : kStacks) {
      auto it = raw.duty_caps.find({c.id, s});
      if (it != raw.duty_caps.end() && std::isfinite(it->second)) {
        caps[s] = std::min(std::clamp(it->second, 0.0, 1.0), headroom_cap(c, s, gamma));
      }
    }
    knobs.duty_caps[c.id] = caps;
  }

  knobs.class_weights = defaults.class_weights;
  for (PriorityClass k : kPriorityClasses) {
    auto it = raw.class_weights.find(k);
    if (it != raw.class_weights.end() && std::isfinite(it->second)) {
      knobs.class_weights[k] = std::clamp(it->second, kMinClassWeight, kMaxClassWeight);
    }
  }
  return knobs;
}

RawPolicyProposal to_raw_proposal(const PolicyKnobs& knobs) {
  RawPolicyProposal raw;
  raw.alpha = knobs.alpha;
  for (const auto& [cid, caps] : knobs.duty_caps) {
    for (Stack s : kStacks) raw.duty_caps[{cid, s}] = caps[s];
  }
  for (PriorityClass k : kPriorityClasses) raw.class_weights[k] = knobs.class_weights[k];
  return raw;
}

std::vector<std::string> validate_knobs(const PolicyKnobs& knobs, const std::vector<ChannelState>& channels,
                                        std::optional<double> gamma) {
  std::vector<std::string> out;
  if (knobs.alpha < 0 || knobs.alpha > 2) out.push_back("alpha " + std::to_string(knobs.alpha) + " not in {0,1,2}");
  for (const auto& c : channels) {
    auto it = knobs.duty_caps.find(c.id);
    if (it == knobs.duty_caps.end()) {
      out.push_back("missing caps for channel " + std::to_string(c.id));
      continue;
    }
    for (Stack s : kStacks) {
      const double cap = it->second[s];
      const std::string where = "cap (" + std::to_string(c.id) + "," + std::string(to_string(s)) + ")";
      if (!(cap >= 0.0 && cap <= 1.0)) out.push_back(where + " out of [0,1]");
      if (gamma && cap > headroom_cap(c, s, *gamma)) out.push_back(where + " exceeds headroom");
    }
  }
  for (PriorityClass k : kPriorityClasses) {
    const double w = knobs.class_weights[k];
    if (!(w >= kMinClassWeight && w <= kMaxClassWeight)) {
      out.push_back("weight " + std::string(to_string(k)) + " out of [0.1,10]");
    }
  }
  return out;
}

EpochSolver make_epoch_solver(const SimConfig& cfg) {
  return [params = solver_params(cfg)](const std::vector<UserState>& users, const std::vector<ChannelState>& channels,
                                       const PolicyKnobs& knobs) { return solve_epoch(users, channels, knobs, params); };
}

int benevolent_alpha(const std::vector<UserState>& users, const std::vector<ChannelState>& channels,
                     const PolicyKnobs& knobs, const EpochSolver& solver) {
  int best_alpha = 0;
  double best_bits = -1.0;
  for (int alpha = 0; alpha <= 2; ++alpha) {
    PolicyKnobs trial = knobs;
    trial.alpha = alpha;
    const double bits = solver(users, channels, trial).total_served_bits();
    if (bits > best_bits) {
      best_bits = bits;
      best_alpha = alpha;
    }
  }
  return best_alpha;
}

PolicyDecision decide_rule_policy(const std::vector<UserState>& users, const std::vector<ChannelState>& channels,
                                  const SimConfig& cfg) {
  PolicyDecision d;
  d.knobs = rule_policy(channels, users, cfg.headroom_gamma);
  d.knobs.alpha = benevolent_alpha(users, channels, d.knobs, make_epoch_solver(cfg));
  d.source = PolicySource::Rule;
  return d;
}

}  // namespace coex
