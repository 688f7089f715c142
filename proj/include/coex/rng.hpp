#pragma once

#include <cstdint>
#include <random>

namespace coex {

/// Deterministic random source shared by the simulation.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are not (their algorithms are
/// implementation-defined), so uniform and normal variates are derived here
/// directly from raw engine words. Every variate consumes a fixed number of
/// engine words, which keeps `draws()` a pure function of the call sequence.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Uniform on [0,1), 53-bit resolution. One engine word.
  double uniform();
  /// Uniform on [lo,hi).
  double uniform(double lo, double hi);
  /// Uniform integer on [lo,hi] inclusive. One engine word.
  int uniform_int(int lo, int hi);
  /// Standard normal via Box-Muller; two engine words, no cached spare.
  double normal();
  double normal(double mean, double sigma);

  /// Number of engine words consumed since construction.
  std::uint64_t draws() const noexcept { return draws_; }

 private:
  std::uint64_t next_word();

  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace coex
