#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coex/link_model.hpp"
#include "coex/types.hpp"

namespace coex {

struct SimConfig {
  double epoch_seconds = 0.1;
  int num_epochs = 100;
  std::uint64_t seed = 2025;
  double offered_load_bps = 40e6;
  double arrival_cv = 0.25;
  double jitter_sigma_busy = 0.02;
  double jitter_sigma_fail = 0.005;
  double headroom_gamma = 0.5;
  double probe_duty = 0.05;
  double epsilon_served = 1.0;
  std::vector<ChannelState> channels;
  std::vector<UserState> users;
  SpectralEfficiencyTable se_table;
  PowerProfile power_profile;

  /// Mean arrival per user per epoch: aggregate load split uniformly.
  double mean_arrival_bits() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

inline constexpr double kModerateLoadBps = 40e6;
inline constexpr double kHighLoadBps = 150e6;

/// Two 160 MHz channels, 16 Wi-Fi and 12 NR-U users with seeded attributes.
SimConfig default_scenario(double load_bps, std::uint64_t seed);

struct ConfigViolation {
  std::string field;    // e.g. "users[3].cqi"
  std::string message;

  friend bool operator==(const ConfigViolation&, const ConfigViolation&) = default;
};

/// Every invariant violation in `cfg`; empty means valid.
std::vector<ConfigViolation> validate_config(const SimConfig& cfg);

std::string format_violation(const ConfigViolation& v);

/// Structural problem while reading a config document (wrong type, bad enum
/// name, missing required array). Range problems are left to validate_config.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::ordered_json to_json(const SimConfig& cfg);
/// Missing scalar keys keep their defaults; `channels` and `users` are required.
SimConfig sim_config_from_json(const nlohmann::json& j);
SimConfig load_sim_config(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const ChannelState& c);
nlohmann::ordered_json to_json(const UserState& u);

}  // namespace coex
