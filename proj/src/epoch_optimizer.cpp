#include "coex/epoch_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace coex {

SolverParams solver_params(const SimConfig& cfg) {
  return {cfg.epoch_seconds, cfg.probe_duty, cfg.epsilon_served, cfg.se_table, cfg.power_profile};
}

double battery_penalty(double battery) noexcept { return 1.0 - battery; }

double latency_multiplier(double latency_target_ms) noexcept {
  return latency_target_ms <= 50.0 ? 1.5 : 1.0;
}

double base_weight(const UserState& u, const PolicyKnobs& knobs) noexcept {
  return knobs.class_weights[u.priority] / (0.5 + battery_penalty(u.battery));
}

bool is_urgent(const UserState& u) noexcept {
  return u.priority == PriorityClass::Emergency || u.priority == PriorityClass::High ||
         u.latency_target_ms <= 50.0;
}

double sla_required_rate(double backlog_bits, double delta_s, double latency_ms) noexcept {
  if (backlog_bits <= 0.0) return 0.0;
  return std::min(backlog_bits / delta_s, backlog_bits / (latency_ms / 1000.0));
}

std::optional<double> utility_density(const UserState& u, const ChannelState& c, const PolicyKnobs& knobs,
                                      double committed_stack_duty, const SolverParams& params) {
  const double se = spectral_efficiency(u, params.se_table, params.power_profile);
  if (se <= 0.0) return std::nullopt;
  const double tau0 = params.probe_duty;
  const double loss = lbt_loss(c.lbt_fail_base[u.stack], committed_stack_duty + tau0, c.busy[u.stack]);
  const double g = goodput(raw_rate(u, c, tau0, params.se_table, params.power_profile), loss);
  const double probe_energy = energy_joules(u, c, g * params.delta_s, params.se_table, params.power_profile);
  const double reward = knobs.class_weights[u.priority] * (g / 1e6) * latency_multiplier(u.latency_target_ms);
  const double cost = battery_penalty(u.battery) * probe_energy;
  return (reward - cost) / tau0;
}

Assignment assign_channels(const std::vector<UserState>& users, const std::vector<ChannelState>& channels,
                           const PolicyKnobs& knobs, const SolverParams& params) {
  struct Key {
    double weight;
    double rho;
    int id;
    std::size_t index;
  };
  std::vector<Key> order;
  order.reserve(users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    const auto& u = users[i];
    order.push_back({knobs.class_weights[u.priority],
                     sla_required_rate(u.backlog_bits, params.delta_s, u.latency_target_ms), u.id, i});
  }
  std::sort(order.begin(), order.end(), [](const Key& a, const Key& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.rho != b.rho) return a.rho > b.rho;
    return a.id < b.id;
  });

  std::vector<std::size_t> channel_order(channels.size());
  std::iota(channel_order.begin(), channel_order.end(), std::size_t{0});
  std::sort(channel_order.begin(), channel_order.end(),
            [&](std::size_t a, std::size_t b) { return channels[a].id < channels[b].id; });

  std::vector<PerStack<double>> committed(channels.size());
  Assignment out;
  for (const auto& key : order) {
    const auto& u = users[key.index];
    std::optional<std::size_t> best;
    double best_phi = 0.0;
    for (std::size_t ci : channel_order) {
      const auto phi = utility_density(u, channels[ci], knobs, committed[ci][u.stack], params);
      if (!phi) continue;
      if (!best || *phi > best_phi) {
        best = ci;
        best_phi = *phi;
      }
    }
    if (!best) continue;
    out[u.id] = channels[*best].id;
    committed[*best][u.stack] += params.probe_duty;
  }
  return out;
}

double StackAllocation::total_duty() const noexcept {
  double total = 0.0;
  for (const auto& m : members) total += m.duty();
  return total;
}

StackAllocation allocate_within_channel(const std::vector<UserState>& members, Stack stack, double cap,
                                        const PolicyKnobs& knobs, const ChannelState& channel,
                                        const SolverParams& params) {
  if (!(cap >= 0.0 && cap <= 1.0)) {
    throw std::invalid_argument("duty cap " + std::to_string(cap) + " on channel " +
                                std::to_string(channel.id) + " outside [0,1]");
  }
  const double fail = channel.lbt_fail_base[stack];
  const double busy = channel.busy[stack];
  const auto& tbl = params.se_table;
  const auto& prof = params.power_profile;

  StackAllocation out;
  out.members.resize(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) out.members[k].user_id = members[k].id;

  // Pass 1: urgent minimum grants, tightest latency target first.
  std::vector<std::size_t> urgent;
  for (std::size_t k = 0; k < members.size(); ++k) {
    if (is_urgent(members[k])) urgent.push_back(k);
  }
  std::sort(urgent.begin(), urgent.end(), [&](std::size_t a, std::size_t b) {
    if (members[a].latency_target_ms != members[b].latency_target_ms) {
      return members[a].latency_target_ms < members[b].latency_target_ms;
    }
    return members[a].id < members[b].id;
  });

  double committed = 0.0;
  for (std::size_t k : urgent) {
    const auto& u = members[k];
    const double remaining = std::max(0.0, cap - committed);
    const double rho = sla_required_rate(u.backlog_bits, params.delta_s, u.latency_target_ms);
    const double rate_per_duty = raw_rate(u, channel, 1.0, tbl, prof) * (1.0 - lbt_loss(fail, committed, busy));
    if (rho <= 0.0 || rate_per_duty <= 0.0 || remaining <= 0.0) continue;
    const double grant = std::min(rho / rate_per_duty, remaining);
    out.members[k].urgent_duty = grant;
    out.members[k].urgent_served_bits = grant * rate_per_duty * params.delta_s;
    committed += grant;
  }

  // Pass 2: weighted alpha-fair split of the residual budget. A member's total
  // duty is capped at what drains its backlog with goodput taken at the loss
  // of a fully used cap, the highest this stack can realize. The urgent grant
  // counts against that cap, so urgent members are topped up when the loss
  // realized at the end exceeds the estimate their grant was sized with.
  const double loss_at_cap = lbt_loss(fail, cap, busy);
  std::vector<double> limit(members.size(), 0.0);
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < members.size(); ++k) {
    const auto& u = members[k];
    auto& m = out.members[k];
    m.omega = base_weight(u, knobs) * std::pow(m.urgent_served_bits + params.epsilon_served, -knobs.alpha);
    const double bits_per_duty = raw_rate(u, channel, 1.0, tbl, prof) * (1.0 - loss_at_cap) * params.delta_s;
    if (bits_per_duty > 0.0) limit[k] = std::max(0.0, u.backlog_bits / bits_per_duty - m.urgent_duty);
    if (limit[k] > 0.0 && m.omega > 0.0) active.push_back(k);
  }

  double budget = std::max(0.0, cap - committed);
  // Progressive filling: each round either saturates at least one member or
  // hands out the whole budget, so it ends within |members| rounds.
  while (budget > 0.0 && !active.empty()) {
    double total_omega = 0.0;
    for (std::size_t k : active) total_omega += out.members[k].omega;

    std::vector<std::size_t> still_active;
    double fixed = 0.0;
    for (std::size_t k : active) {
      if (budget * out.members[k].omega / total_omega >= limit[k]) {
        out.members[k].fair_duty = limit[k];
        out.members[k].saturated = true;
        fixed += limit[k];
      } else {
        still_active.push_back(k);
      }
    }
    if (still_active.size() == active.size()) {
      for (std::size_t k : active) out.members[k].fair_duty = budget * out.members[k].omega / total_omega;
      break;
    }
    budget = std::max(0.0, budget - fixed);
    active = std::move(still_active);
  }
  return out;
}

double AllocationResult::total_served_bits() const noexcept {
  double total = 0.0;
  for (const auto& u : users) total += u.served_bits;
  return total;
}

double AllocationResult::total_energy_j() const noexcept {
  double total = 0.0;
  for (const auto& u : users) total += u.energy_j;
  return total;
}

AllocationResult solve_epoch(const std::vector<UserState>& users, const std::vector<ChannelState>& channels,
                             const PolicyKnobs& knobs, const SolverParams& params) {
  const Assignment assignment = assign_channels(users, channels, knobs, params);

  AllocationResult res;
  res.users.resize(users.size());
  std::map<int, std::size_t> user_index;
  for (std::size_t i = 0; i < users.size(); ++i) {
    user_index[users[i].id] = i;
    auto& a = res.users[i];
    a.user_id = users[i].id;
    a.sla_required_bps = sla_required_rate(users[i].backlog_bits, params.delta_s, users[i].latency_target_ms);
  }

  for (const auto& ch : channels) {
    for (Stack s : kStacks) {
      std::vector<UserState> members;
      for (const auto& u : users) {
        auto it = assignment.find(u.id);
        if (u.stack == s && it != assignment.end() && it->second == ch.id) members.push_back(u);
      }
      const double cap = knobs.cap(ch.id, s);
      const StackAllocation alloc = allocate_within_channel(members, s, cap, knobs, ch, params);

      StackChannelOutcome outcome{ch.id, s, cap, 0.0, 0.0};
      for (const auto& m : alloc.members) outcome.aggregate_duty += m.duty();
      outcome.loss = lbt_loss(ch.lbt_fail_base[s], outcome.aggregate_duty, ch.busy[s]);
      res.stack_channels.push_back(outcome);

      for (std::size_t k = 0; k < members.size(); ++k) {
        const auto& u = members[k];
        auto& a = res.users[user_index.at(u.id)];
        a.channel_id = ch.id;
        a.duty = alloc.members[k].duty();
        a.goodput_bps = goodput(raw_rate(u, ch, a.duty, params.se_table, params.power_profile), outcome.loss);
        a.served_bits = std::min(params.delta_s * a.goodput_bps, u.backlog_bits);
        a.energy_j = energy_joules(u, ch, a.served_bits, params.se_table, params.power_profile);
      }
    }
  }

  for (std::size_t i = 0; i < users.size(); ++i) {
    auto& a = res.users[i];
    a.sla_hit = users[i].backlog_bits <= 0.0 || a.goodput_bps >= a.sla_required_bps;
  }
  return res;
}

AllocationResult solve_epoch(const std::vector<UserState>& users, const std::vector<ChannelState>& channels,
                             const PolicyKnobs& knobs, const SimConfig& cfg) {
  return solve_epoch(users, channels, knobs, solver_params(cfg));
}

EpochTotals epoch_metrics(const AllocationResult& res, const std::vector<UserState>& users, int alpha) {
  EpochTotals t;
  t.alpha = alpha;
  t.served_bits = res.total_served_bits();
  t.energy_j = res.total_energy_j();
  std::size_t hits = 0;
  std::size_t backlogged = 0;
  std::size_t backlogged_hits = 0;
  for (std::size_t i = 0; i < res.users.size(); ++i) {
    const bool hit = res.users[i].sla_hit;
    hits += hit ? 1 : 0;
    if (i < users.size() && users[i].backlog_bits > 0.0) {
      ++backlogged;
      backlogged_hits += hit ? 1 : 0;
    }
  }
  if (!res.users.empty()) t.sla_hit_rate = static_cast<double>(hits) / static_cast<double>(res.users.size());
  if (backlogged > 0) t.sla_hit_rate_backlogged = static_cast<double>(backlogged_hits) / static_cast<double>(backlogged);
  return t;
}

}  // namespace coex
