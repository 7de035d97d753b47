#pragma once

#include <cstdint>
#include <random>

namespace pnpmri {

/// Seeded generator whose output is fixed across standard libraries:
/// std::mt19937_64 is fully specified by the standard, and the uniform and
/// normal transforms below are written out instead of using the
/// implementation-defined <random> distributions.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, cached pair).
  double normal();
  std::uint64_t bits() { return engine_(); }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Derives an independent stream seed from a base seed and a stream index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

} // namespace pnpmri
