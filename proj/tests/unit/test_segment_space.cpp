#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sdde/noise.hpp"
#include "sdde/rng.hpp"
#include "sdde/segment_space.hpp"

using namespace sdde;

namespace {

M2Element constant_element(double point, double value, double r, std::size_t K) {
  M2Element e;
  e.point = point;
  e.hist.assign(K + 1, value);
  e.r = r;
  return e;
}

}  // namespace

TEST_CASE("inner product on constant elements matches hand values") {
  const M2Element unit = constant_element(1.0, 0.0, 1.0, 8);
  CHECK(m2_inner(unit, unit) == doctest::Approx(1.0).epsilon(1e-15));

  // <(2, 3), (1, 1)> over r = 1: 2*1 + int_{-1}^0 3 du = 5, trapezoid exact.
  const M2Element x = constant_element(2.0, 3.0, 1.0, 16);
  const M2Element y = constant_element(1.0, 1.0, 1.0, 16);
  CHECK(m2_inner(x, y) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(m2_inner(x, y) == m2_inner(y, x));

  const M2Element z = constant_element(0.0, -2.0, 2.25, 10);
  CHECK(m2_norm(z) == doctest::Approx(2.0 * std::sqrt(2.25)).epsilon(1e-15));
}

TEST_CASE("inner product is trapezoid quadrature, not midpoint or Simpson") {
  // x(u) = u on [-1, 0], K = 2: nodes (-1, -1/2, 0), trapezoid of u^2 gives
  // (1/2)(1)(1/4 + ... ) = 3/8 with du = 1/2: exact value 1/3, trapezoid 3/8.
  M2Element x;
  x.r = 1.0;
  x.hist = {-1.0, -0.5, 0.0};
  x.point = 0.0;
  CHECK(m2_inner(x, x) == doctest::Approx(0.375).epsilon(1e-15));
}

TEST_CASE("mismatched grids or empty history are rejected") {
  const M2Element a = constant_element(0.0, 1.0, 1.0, 8);
  const M2Element b = constant_element(0.0, 1.0, 1.0, 9);
  CHECK_THROWS_AS((void)m2_inner(a, b), std::invalid_argument);
  M2Element empty;
  empty.hist.clear();
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("basis is orthonormal under the trapezoid inner product") {
  for (const double r : {1.0, 1.3, 2.0}) {
    const BasisSet basis = build_basis(r, 8, 64);
    REQUIRE(basis.count() == 8);
    for (std::size_t i = 1; i <= 8; ++i)
      for (std::size_t j = 1; j <= 8; ++j) {
        const double expected = i == j ? 1.0 : 0.0;
        CHECK(std::abs(m2_inner(basis.e(i), basis.e(j)) - expected) <= 1e-12);
      }
  }
}

TEST_CASE("basis count above the grid resolution is rejected") {
  CHECK_THROWS_AS((void)build_basis(1.0, 10, 8), std::invalid_argument);
  CHECK_NOTHROW((void)build_basis(1.0, 9, 8));
}

TEST_CASE("chi closed-form values") {
  const double r = 1.0;
  const BasisSet basis = build_basis(r, 6, 128);
  // e_1 = (1, 0): only the point part couples, chi_1 = 1 for every z.
  for (const double z : {0.0, -0.25, -0.7, -1.0}) CHECK(chi(1, z, basis) == 1.0);
  // e_2 = (0, 1/sqrt(r)): chi_2(-r) = r / sqrt(r) = sqrt(r).
  CHECK(chi(2, -r, basis) == doctest::Approx(std::sqrt(r)).epsilon(1e-12));
  // z = 0 leaves an empty indicator window: only the point part survives.
  for (std::size_t j = 2; j <= 6; ++j) CHECK(chi(j, 0.0, basis) == 0.0);
  // Saturation freezes the value below -r and outside.
  CHECK(chi_saturated(2, -5.0, basis) == chi(2, -r, basis));
  CHECK(chi_saturated(1, 3.0, basis) == 1.0);
  CHECK(chi_saturated(4, 0.5, basis) == 0.0);
}

TEST_CASE("chi oscillating components integrate to zero over the full window") {
  // For k >= 2 the cosine has whole periods on [-r, 0]: chi_j(-r) = 0.
  const BasisSet basis = build_basis(1.5, 6, 96);
  for (std::size_t j = 3; j <= 6; ++j) CHECK(std::abs(chi(j, -1.5, basis)) <= 1e-12);
}

TEST_CASE("chi is 1/2-Hoelder with constant 1 on the grid") {
  const double r = 1.7;
  const BasisSet basis = build_basis(r, 8, 64);
  NormalStream rng(2024);
  for (int probe = 0; probe < 2000; ++probe) {
    const std::size_t j = 1 + static_cast<std::size_t>(rng.next_uniform() * 7.999);
    const double z1 = -r * rng.next_uniform();
    const double z2 = -r * rng.next_uniform();
    const double lhs = std::abs(chi(j, z1, basis) - chi(j, z2, basis));
    CHECK(lhs <= std::sqrt(std::abs(z1 - z2)) + 1e-9);
  }
}

TEST_CASE("chi magnitude bound sqrt(1 + r)") {
  const double r = 0.8;
  const BasisSet basis = build_basis(r, 8, 64);
  NormalStream rng(7);
  for (int probe = 0; probe < 2000; ++probe) {
    const std::size_t j = 1 + static_cast<std::size_t>(rng.next_uniform() * 7.999);
    const double z = -r * rng.next_uniform();
    CHECK(std::abs(chi(j, z, basis)) <= std::sqrt(1.0 + r) + 1e-12);
  }
}

TEST_CASE("window arithmetic accepts integer ratios only") {
  SegmentGridConfig g;
  g.dt = 0.125;
  g.r = 1.0;
  CHECK(g.window() == 8);
  g.r = 1.1;
  CHECK_THROWS_AS((void)g.window(), std::invalid_argument);
}

TEST_CASE("segment extraction stitches path and pre-history") {
  const double dt = 0.25, r = 1.0;
  const std::size_t K = 4;
  M2Element eta = constant_element(0.0, 0.0, r, K);
  for (std::size_t k = 0; k <= K; ++k)
    eta.hist[k] = -1.0 + static_cast<double>(k) * dt;  // eta(u) = u
  eta.point = 0.0;

  std::vector<double> path = {0.0, 1.0, 2.0, 3.0, 4.0};  // x(t_k) = 4 t_k

  // t = 0: the segment is exactly the pre-history.
  const M2Element seg0 = segment_extract(std::span(path.data(), 1), dt, 0.0, eta);
  CHECK(seg0.point == 0.0);
  for (std::size_t k = 0; k <= K; ++k) CHECK(seg0.hist[k] == eta.hist[k]);

  // t = 0.5: two nodes of history remain, then path values.
  const M2Element seg = segment_extract(std::span(path.data(), 3), dt, 0.5, eta);
  CHECK(seg.point == 2.0);
  CHECK(seg.hist[0] == -0.5);  // eta(-0.5)
  CHECK(seg.hist[1] == -0.25);
  CHECK(seg.hist[2] == 0.0);  // x(0)
  CHECK(seg.hist[3] == 1.0);
  CHECK(seg.hist[4] == 2.0);

  // t = 1: pure path window.
  const M2Element seg1 = segment_extract(path, dt, 1.0, eta);
  for (std::size_t k = 0; k <= K; ++k) CHECK(seg1.hist[k] == path[k]);
}

TEST_CASE("segment functional F reproduces segment inner products") {
  const double r = 1.0, dt = 1.0 / 16.0, T = 2.0;
  const std::size_t K = 16, steps = 32;
  const BasisSet basis = build_basis(r, 5, K);
  const M2Element eta = constant_element(0.4, 0.4, r, K);
  const std::vector<double> grid = make_uniform_grid(T, steps);
  const M2Element zero_eta = constant_element(0.0, 0.0, r, K);

  NormalStream rng(99);
  for (int rep = 0; rep < 100; ++rep) {
    const std::vector<double> W = sample_brownian(grid, rng);
    std::vector<double> x(W.size());
    for (std::size_t k = 0; k < W.size(); ++k) x[k] = eta.point + W[k];
    const std::size_t k_t = 3 + static_cast<std::size_t>(rng.next_uniform() * 28.999);
    const double t = grid[k_t];
    const M2Element x_seg = segment_extract(std::span(x.data(), k_t + 1), dt, t, eta);
    const M2Element w_seg = segment_extract(std::span(W.data(), k_t + 1), dt, t, zero_eta);
    for (std::size_t i = 1; i <= 5; ++i) {
      const double direct = m2_inner(x_seg, basis.e(i));
      const double via_f = segment_functional_F(i, t, w_seg, eta, basis);
      CHECK(std::abs(direct - via_f) <= 1e-8 * (1.0 + std::abs(direct)));
    }
  }
}
