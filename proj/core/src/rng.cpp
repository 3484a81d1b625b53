#include "sdde/rng.hpp"

#include <cmath>
#include <numbers>

namespace sdde {

std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t lane,
                          std::uint64_t component) noexcept {
  std::uint64_t s = mix64(master);
  s = mix64(s ^ (0xa0761d6478bd642fULL + lane));
  s = mix64(s ^ (0xe7037ed1a0b428dbULL + component));
  return s;
}

double NormalStream::next_uniform() {
  // (0, 1]: 53-bit mantissa, never 0 so log() below stays finite.
  return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
}

double NormalStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  spare_ = rad * std::sin(ang);
  has_spare_ = true;
  return rad * std::cos(ang);
}

void NormalStream::fill(std::span<double> out) {
  for (double& v : out) v = next();
}

}  // namespace sdde
