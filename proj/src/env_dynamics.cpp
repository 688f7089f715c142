#include "coex/env_dynamics.hpp"

#include <algorithm>

namespace coex {

ArrivalProcess arrival_process(const SimConfig& cfg) {
  const double mean = cfg.mean_arrival_bits();
  return {mean, cfg.arrival_cv * mean};
}

std::vector<ChannelState> step_env(const std::vector<ChannelState>& channels, SeededRng& rng,
                                   const SimConfig& cfg) {
  std::vector<ChannelState> out = channels;
  for (auto& c : out) {
    for (Stack s : kStacks) {
      c.busy[s] = std::clamp(c.busy[s] + cfg.jitter_sigma_busy * rng.normal(), 0.0, 1.0);
    }
    for (Stack s : kStacks) {
      c.lbt_fail_base[s] =
          std::clamp(c.lbt_fail_base[s] + cfg.jitter_sigma_fail * rng.normal(), 0.0, kMaxBaselineFail);
    }
  }
  return out;
}

std::vector<double> draw_arrivals(const std::vector<UserState>& users, SeededRng& rng,
                                  const ArrivalProcess& proc) {
  std::vector<double> out;
  out.reserve(users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    out.push_back(std::max(0.0, rng.normal(proc.mean_bits_per_epoch, proc.sigma_bits)));
  }
  return out;
}

double update_queue(double backlog, double arrivals, double served) noexcept {
  return std::max(0.0, backlog + arrivals - served);
}

}  // namespace coex
