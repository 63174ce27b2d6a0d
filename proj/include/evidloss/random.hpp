#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace evidloss {

/// Seeded random stream. The engine is std::mt19937_64 (output fully
/// specified by the standard); every variate transform is implemented here so
/// that sequences are bit-identical across standard library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Stream `index` of a root seed, e.g. one per verification case or thread.
  static Rng derive(std::uint64_t root_seed, std::uint64_t index);
  static Rng derive(std::uint64_t root_seed, std::string_view label);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal, Box-Muller (the paired value is cached).
  double normal();
  double exponential(double mean);
  /// Gamma(shape, 1) by the Marsaglia-Tsang squeeze method; shapes below one
  /// use the G(a) = G(a+1) * U^(1/a) boost.
  double gamma(double shape);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

std::uint64_t mix_seed(std::uint64_t root_seed, std::uint64_t index);

}  // namespace evidloss
