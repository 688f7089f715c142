#include "coex/runner.hpp"

#include "coex/env_dynamics.hpp"
#include "coex/rng.hpp"

namespace coex {

std::string_view to_string(PolicyMode m) noexcept {
  switch (m) {
    case PolicyMode::Rule: return "rule";
    case PolicyMode::Llm: return "llm";
    case PolicyMode::Mock: return "mock";
  }
  return "rule";
}

std::optional<PolicyMode> parse_policy_mode(std::string_view s) noexcept {
  for (PolicyMode m : {PolicyMode::Rule, PolicyMode::Llm, PolicyMode::Mock}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

RunResult run_multi_epoch(const SimConfig& cfg, PolicyMode mode, PolicyTransport* transport,
                          const EpochObserver& observer) {
  if (const auto violations = validate_config(cfg); !violations.empty()) {
    std::string msg = "invalid config:";
    for (const auto& v : violations) msg += "\n  " + format_violation(v);
    throw ConfigError(msg);
  }
  if (mode != PolicyMode::Rule && transport == nullptr) {
    throw ConfigError(std::string(to_string(mode)) + " policy mode requires an endpoint");
  }

  SeededRng rng(cfg.seed);
  const ArrivalProcess arrivals_proc = arrival_process(cfg);
  const SolverParams params = solver_params(cfg);

  std::vector<ChannelState> channels = cfg.channels;
  std::vector<UserState> users = cfg.users;

  RunResult run;
  run.records.reserve(static_cast<std::size_t>(cfg.num_epochs));
  for (const auto& u : users) run.ledger.push_back({u.id, u.backlog_bits, 0.0, 0.0, u.backlog_bits});

  double cum_bits = 0.0;
  double cum_energy = 0.0;
  for (int epoch = 1; epoch <= cfg.num_epochs; ++epoch) {
    channels = step_env(channels, rng, cfg);
    const std::vector<double> arrivals = draw_arrivals(users, rng, arrivals_proc);

    std::vector<double> backlog_before(users.size());
    for (std::size_t i = 0; i < users.size(); ++i) {
      backlog_before[i] = users[i].backlog_bits;
      users[i].backlog_bits += arrivals[i];
    }

    const PolicyDecision decision = mode == PolicyMode::Rule
                                        ? decide_rule_policy(users, channels, cfg)
                                        : decide_policy(channels, users, *transport, cfg);
    const AllocationResult result = solve_epoch(users, channels, decision.knobs, params);
    const EpochTotals totals = epoch_metrics(result, users, decision.knobs.alpha);

    if (observer) observer(EpochSnapshot{epoch, users, channels, decision, result});

    cum_bits += totals.served_bits;
    cum_energy += totals.energy_j;
    EpochRecord rec;
    rec.epoch = epoch;
    rec.policy_source = decision.source;
    rec.alpha = decision.knobs.alpha;
    rec.served_bits = totals.served_bits;
    rec.energy_j = totals.energy_j;
    rec.sla_hit_rate = totals.sla_hit_rate;
    rec.sla_hit_rate_backlogged = totals.sla_hit_rate_backlogged;
    rec.cum_bits = cum_bits;
    rec.cum_energy_j = cum_energy;
    rec.cum_bits_per_joule = cum_energy > 0.0 ? cum_bits / cum_energy : 0.0;
    rec.duty_caps = decision.knobs.duty_caps;
    rec.class_weights = decision.knobs.class_weights;
    rec.fault = decision.fault;
    rec.rationale = decision.rationale;
    run.records.push_back(std::move(rec));

    for (std::size_t i = 0; i < users.size(); ++i) {
      const double served = result.users[i].served_bits;
      users[i].backlog_bits = update_queue(backlog_before[i], arrivals[i], served);
      run.ledger[i].total_arrivals += arrivals[i];
      run.ledger[i].total_served += served;
      run.ledger[i].final_backlog = users[i].backlog_bits;
    }
  }

  run.final_users = std::move(users);
  run.final_channels = std::move(channels);
  run.rng_draws = rng.draws();
  return run;
}

RunResult run_multi_epoch(const SimConfig& cfg, PolicyMode mode, const std::optional<LlmEndpointConfig>& endpoint,
                          const EpochObserver& observer) {
  if (mode == PolicyMode::Rule) return run_multi_epoch(cfg, mode, nullptr, observer);
  if (!endpoint) throw ConfigError(std::string(to_string(mode)) + " policy mode requires an endpoint config");
  if (const auto problems = validate_endpoint_config(*endpoint); !problems.empty()) {
    throw ConfigError("invalid endpoint config: " + problems.front());
  }
  auto transport = make_transport(*endpoint);
  return run_multi_epoch(cfg, mode, transport.get(), observer);
}

}  // namespace coex
