#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace risauction {

/// Mixes (root, tag, index) into an independent child seed so that every
/// consumer of randomness (scenario, fading, phases, policy sampling...) owns
/// a reproducible stream that does not shift when another consumer changes.
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index = 0);

/// Seeded generator with library-independent distributions. The standard
/// distribution classes are implementation-defined, so uniform/normal are
/// computed here directly from the 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}
  Rng(std::uint64_t root, std::string_view tag, std::uint64_t index = 0)
      : engine_(derive_seed(root, tag, index)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of mantissa.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Circularly-symmetric complex Gaussian with unit variance, CN(0, 1).
  std::complex<double> complex_normal();

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::string state() const;
  void restore(const std::string& state);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace risauction
