#pragma once

// Per-epoch link physics: CQI to spectral efficiency, raw rate, the LBT loss
// proxy, post-LBT goodput and transmit energy. All functions are pure.

#include <array>
#include <stdexcept>

#include "coex/types.hpp"

namespace coex {

/// Bits/s/Hz per CQI index; entry 0 is the out-of-range CQI and carries zero.
struct SpectralEfficiencyTable {
  std::array<double, 16> se_by_cqi{0.0,    0.1523, 0.2344, 0.3770, 0.6016, 0.8770,
                                   1.1758, 1.4766, 1.9141, 2.4063, 2.7305, 3.3223,
                                   3.9023, 4.5234, 5.1152, 5.5547};

  friend bool operator==(const SpectralEfficiencyTable&, const SpectralEfficiencyTable&) = default;
};

struct PowerProfile {
  PerPowerMode<double> tx_power_w{{0.1, 0.2, 0.4}};
  PerPowerMode<double> se_scale{{0.8, 1.0, 1.15}};

  friend bool operator==(const PowerProfile&, const PowerProfile&) = default;
};

inline constexpr double kMaxLbtLoss = 0.95;

class EnergyUndefinedError : public std::domain_error {
 public:
  EnergyUndefinedError() : std::domain_error("energy undefined for zero-rate user") {}
};

double spectral_efficiency(const UserState& u, const SpectralEfficiencyTable& tbl,
                           const PowerProfile& prof);

/// Pre-LBT rate in bits/s for `duty` of the epoch airtime on `c`.
double raw_rate(const UserState& u, const ChannelState& c, double duty,
                const SpectralEfficiencyTable& tbl, const PowerProfile& prof);

/// Stack-channel loss fraction:
///   min{0.95, f + 0.6*tau*b + 0.2*(tau + b - 1)_+}
/// `agg_duty` is clamped to [0,1] first; probe-phase sums may exceed 1.
double lbt_loss(double fail_base, double agg_duty, double busy) noexcept;

double goodput(double raw_bps, double loss) noexcept;

/// Joules per bit at the user's power mode: P / (s * B_c).
double energy_per_bit(const UserState& u, const ChannelState& c,
                      const SpectralEfficiencyTable& tbl, const PowerProfile& prof);

/// Energy to deliver `served_bits`. Throws EnergyUndefinedError when bits are
/// served by a user whose spectral efficiency is zero.
double energy_joules(const UserState& u, const ChannelState& c, double served_bits,
                     const SpectralEfficiencyTable& tbl, const PowerProfile& prof);

}  // namespace coex
