#include "coex/link_model.hpp"

#include <algorithm>

namespace coex {

double spectral_efficiency(const UserState& u, const SpectralEfficiencyTable& tbl,
                           const PowerProfile& prof) {
  if (u.cqi <= 0 || u.cqi > 15) return 0.0;
  return tbl.se_by_cqi[static_cast<std::size_t>(u.cqi)] * prof.se_scale[u.power_mode];
}

double raw_rate(const UserState& u, const ChannelState& c, double duty,
                const SpectralEfficiencyTable& tbl, const PowerProfile& prof) {
  return spectral_efficiency(u, tbl, prof) * c.bandwidth_hz * duty;
}

double lbt_loss(double fail_base, double agg_duty, double busy) noexcept {
  const double tau = std::clamp(agg_duty, 0.0, 1.0);
  const double knee = std::max(tau + busy - 1.0, 0.0);
  return std::min(kMaxLbtLoss, fail_base + 0.6 * tau * busy + 0.2 * knee);
}

double goodput(double raw_bps, double loss) noexcept {
  return std::max(0.0, raw_bps * (1.0 - loss));
}

double energy_per_bit(const UserState& u, const ChannelState& c,
                      const SpectralEfficiencyTable& tbl, const PowerProfile& prof) {
  const double se = spectral_efficiency(u, tbl, prof);
  if (se <= 0.0) throw EnergyUndefinedError();
  return prof.tx_power_w[u.power_mode] / (se * c.bandwidth_hz);
}

double energy_joules(const UserState& u, const ChannelState& c, double served_bits,
                     const SpectralEfficiencyTable& tbl, const PowerProfile& prof) {
  if (served_bits <= 0.0) return 0.0;
  return energy_per_bit(u, c, tbl, prof) * served_bits;
}

}  // namespace coex
