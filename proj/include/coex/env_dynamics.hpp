#pragma once

#include <vector>

#include "coex/config.hpp"
#include "coex/rng.hpp"
#include "coex/types.hpp"

namespace coex {

struct ArrivalProcess {
  double mean_bits_per_epoch = 0.0;
  double sigma_bits = 0.0;
};

/// Per-user arrival process implied by the config's aggregate load and CV.
ArrivalProcess arrival_process(const SimConfig& cfg);

inline constexpr double kMaxBaselineFail = 0.5;

/// Jitters busy fractions (clamped to [0,1]) and baseline LBT failure
/// (clamped to [0,0.5]). Draw order per channel: busy wifi, busy nru,
/// fail wifi, fail nru. Always consumes 4 normals per channel.
std::vector<ChannelState> step_env(const std::vector<ChannelState>& channels, SeededRng& rng,
                                   const SimConfig& cfg);

/// One truncated-Gaussian draw max(0, N(mean, sigma^2)) per user, aligned
/// with `users`. One normal per user.
std::vector<double> draw_arrivals(const std::vector<UserState>& users, SeededRng& rng,
                                  const ArrivalProcess& proc);

/// Lindley recursion: max(0, backlog + arrivals - served).
double update_queue(double backlog, double arrivals, double served) noexcept;

}  // namespace coex
