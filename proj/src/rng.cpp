#include "coex/rng.hpp"

#include <cmath>
#include <numbers>

namespace coex {

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream) {
  // seed_seq output is specified by the standard, so this is portable.
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

std::uint64_t SeededRng::next_word() {
  ++draws_;
  return engine_();
}

double SeededRng::uniform() {
  return static_cast<double>(next_word() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

int SeededRng::uniform_int(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo + 1);
  // Modulo bias is below 2^-58 for the spans used here.
  return lo + static_cast<int>(next_word() % span);
}

double SeededRng::normal() {
  // 1 - u keeps the log argument in (0,1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double SeededRng::normal(double mean, double sigma) {
  return mean + sigma * normal();
}

}  // namespace coex
