#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace sdde {

/// splitmix64 finalizer; bijective on 64-bit words.
[[nodiscard]] std::uint64_t mix64(std::uint64_t z) noexcept;

/// Seed for the (lane, component) stream of a master seed. Distinct inputs
/// give decorrelated engine states; the mapping is pure arithmetic, so the
/// same (master, lane, component) triple always yields the same stream.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::uint64_t lane,
                                        std::uint64_t component = 0) noexcept;

/// Standard-normal generator over mt19937_64 with a pinned Box-Muller
/// transform. std::normal_distribution is not pinned by the standard; this
/// keeps variate sequences a pure function of the seed.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : eng_(seed) {}

  [[nodiscard]] double next();
  void fill(std::span<double> out);

  /// Uniform draw in (0, 1].
  [[nodiscard]] double next_uniform();

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sdde
