#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "sdde/assumptions.hpp"
#include "sdde/kernels.hpp"
#include "sdde/rng.hpp"
#include "sdde/segment_space.hpp"

using namespace sdde;

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t acc = 1;
  for (std::size_t i = 0; i < k; ++i) acc = acc * (n - i) / (i + 1);
  return acc;
}

}  // namespace

TEST_CASE("shuffle enumeration matches brute-force permutation filtering") {
  for (std::size_t m = 1; m <= 4; ++m)
    for (std::size_t n = 1; n <= 4; ++n) {
      if (m + n > 7) continue;
      const ShuffleSet s = shuffles(m, n);
      CHECK(s.size() == binomial(m + n, m));
      CHECK(s.perms == oracle::brute_shuffles(m, n));
    }
}

TEST_CASE("shuffle set S(1,2) in closed form") {
  const ShuffleSet s = shuffles(1, 2);
  REQUIRE(s.size() == 3);
  CHECK(s.perms[0] == std::vector<std::size_t>{0, 1, 2});
  CHECK(s.perms[1] == std::vector<std::size_t>{1, 0, 2});
  CHECK(s.perms[2] == std::vector<std::size_t>{2, 0, 1});
}

TEST_CASE("shuffle product identity holds for monomials") {
  // Residuals are exact-quadrature differences, so roundoff-level.
  MonomialSpec f, g;

  f.powers = {0};
  g.powers = {0};
  CHECK(shuffle_product_check(f, g, 1, 1, 0.3, 1.1) <= 1e-13);

  f.powers = {1};
  g.powers = {0};
  CHECK(shuffle_product_check(f, g, 1, 1, 0.0, 1.0) <= 1e-12);

  f.powers = {2, 1};
  g.powers = {1};
  CHECK(shuffle_product_check(f, g, 2, 1, 0.2, 0.9) <= 1e-12);

  f.powers = {1, 1};
  g.powers = {2, 2};
  CHECK(shuffle_product_check(f, g, 2, 2, 0.1, 1.2) <= 1e-11);

  f.powers = {3, 0, 2};
  g.powers = {1, 2};
  CHECK(shuffle_product_check(f, g, 3, 2, 0.0, 1.0) <= 1e-11);

  // Worst admitted degree on a unit-scale domain.
  f.powers = {7, 7, 7};
  g.powers = {7, 7, 7};
  CHECK(shuffle_product_check(f, g, 3, 3, 0.0, 1.0) <= 1e-12);
}

TEST_CASE("shuffle product rejects out-of-cap inputs") {
  MonomialSpec f, g;
  f.powers = {0, 0, 0, 0};
  g.powers = {0, 0, 0};
  CHECK_THROWS_AS((void)shuffle_product_check(f, g, 4, 3, 0.0, 1.0), std::invalid_argument);
  f.powers = {8};
  g.powers = {0};
  CHECK_THROWS_AS((void)shuffle_product_check(f, g, 1, 1, 0.0, 1.0), std::invalid_argument);
  f.powers = {0, 0};  // arity mismatch with m = 1
  CHECK_THROWS_AS((void)shuffle_product_check(f, g, 1, 1, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("squared-integral index map is a bijection with the documented layout") {
  // Hand case m = n = 1.
  const ShuffleSet s11 = shuffles(1, 1);
  REQUIRE(s11.size() == 2);
  const auto id2 = s11.perms[0];   // {0, 1}
  const auto sw2 = s11.perms[1];   // {1, 0}
  CHECK(square_index_map(id2, id2, 1, 1) == std::vector<std::size_t>{0, 2, 1, 3});
  CHECK(square_index_map(sw2, id2, 1, 1) == std::vector<std::size_t>{1, 2, 0, 3});
  CHECK(square_index_map(id2, sw2, 1, 1) == std::vector<std::size_t>{0, 3, 1, 2});

  // Every (sigma, tau) combination yields a permutation of 0..2(m+n)-1.
  for (const std::size_t m : {1, 2}) {
    for (const std::size_t n : {1, 2}) {
      const ShuffleSet sm = shuffles(m, m);
      const ShuffleSet sn = shuffles(n, n);
      for (const auto& sigma : sm.perms)
        for (const auto& tau : sn.perms) {
          const std::vector<std::size_t> map = square_index_map(sigma, tau, m, n);
          REQUIRE(map.size() == 2 * (m + n));
          std::set<std::size_t> seen(map.begin(), map.end());
          CHECK(seen.size() == map.size());
          CHECK(*seen.rbegin() == map.size() - 1);
          // First range carries sigma directly, second is tau shifted by 2m.
          for (std::size_t l = 0; l < m; ++l) CHECK(map[l] == sigma[l]);
          for (std::size_t l = 0; l < n; ++l) CHECK(map[m + l] == 2 * m + tau[l]);
        }
    }
  }
}

TEST_CASE("squared-integral identity holds for monomials") {
  MonomialSpec f;
  f.powers = {0, 0};
  CHECK(shuffle_square_check(f, 1, 1, 0.0, 0.4, 1.0) <= 1e-12);
  f.powers = {1, 2};
  CHECK(shuffle_square_check(f, 1, 1, 0.1, 0.5, 1.2) <= 1e-11);
  f.powers = {2, 1};
  CHECK(shuffle_square_check(f, 2, 0 + 1 - 1, 0.0, 0.3, 1.0) <= 1e-11);
  f.powers = {1, 1, 1, 1};
  CHECK(shuffle_square_check(f, 2, 2, 0.05, 0.35, 0.9) <= 1e-11);
}

TEST_CASE("simplex closed form against frozen high-precision references") {
  CHECK(simplex_integral_closed({{-0.75, 0.0}, 0.0, 1.3}) ==
        doctest::Approx(4.4420062850693539).epsilon(1e-13));
  CHECK(simplex_integral_closed({{-0.3, 0.5, 1.25}, 0.2, 1.1}) ==
        doctest::Approx(0.016883695461026466).epsilon(1e-13));
  CHECK(simplex_integral_closed({{-0.9, -0.9, -0.9, -0.9}, 0.1, 0.85}) ==
        doctest::Approx(8228.7606426310409).epsilon(1e-13));
}

TEST_CASE("simplex closed form matches elementary laws") {
  // Single factor: int_theta^t (s - theta)^a ds.
  for (const double a : {-0.5, 0.0, 1.0, 2.5}) {
    const double got = simplex_integral_closed({{a}, 0.3, 1.7});
    const double want = std::pow(1.4, a + 1.0) / (a + 1.0);
    CHECK(got == doctest::Approx(want).epsilon(1e-14));
  }
  // Zero exponents: the simplex volume (t - theta)^m / m!.
  double factorial = 1.0;
  for (std::size_t m = 1; m <= 4; ++m) {
    factorial *= static_cast<double>(m);
    const std::vector<double> a(m, 0.0);
    const double got = simplex_integral_closed({a, 0.2, 1.4});
    CHECK(got == doctest::Approx(std::pow(1.2, double(m)) / factorial).epsilon(1e-14));
  }
}

TEST_CASE("simplex closed form against the nested-quadrature oracle") {
  struct Case {
    std::vector<double> a;
    double theta, t;
    int level;
  };
  const std::vector<Case> cases = {
      {{-0.5}, 0.0, 1.0, 5},
      {{-0.9}, 0.2, 0.9, 5},
      {{-0.75, 0.0}, 0.0, 1.3, 5},
      {{-0.9, -0.9}, 0.1, 1.0, 5},
      {{0.5, -0.5}, 0.3, 1.1, 5},
      {{-0.3, 0.5, 1.25}, 0.2, 1.1, 4},
      {{-0.9, -0.9, -0.9}, 0.3, 1.0, 4},
      {{-0.9, -0.9, -0.9, -0.9}, 0.1, 0.85, 3},
      {{-0.9, 0.5, -0.75, 0.0}, 0.2, 1.0, 3},
  };
  for (const auto& c : cases) {
    const double closed = simplex_integral_closed({c.a, c.theta, c.t});
    const double rec = oracle::simplex_recursive(c.a, c.theta, c.t, c.level);
    CHECK(std::abs(rec - closed) <= 1e-12 * std::abs(closed));
  }
}

TEST_CASE("polynomial oracle agrees with the closed form on integer powers") {
  for (const auto& powers : std::vector<std::vector<unsigned>>{
           {0}, {3}, {1, 2}, {2, 0, 1}, {1, 1, 1, 1}, {7, 7, 7}}) {
    std::vector<double> a(powers.begin(), powers.end());
    const double closed = simplex_integral_closed({a, 0.2, 1.1});
    const double poly = oracle::simplex_monomial_poly(powers, 0.2, 1.1);
    CHECK(std::abs(poly - closed) <= 1e-13 * std::abs(closed));
  }
}

TEST_CASE("simplex spec validation") {
  CHECK_THROWS_AS((void)simplex_integral_closed({{-1.0}, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS((void)simplex_integral_closed({{0.0}, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS((void)simplex_integral_closed({{}, 0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("point kernel: unit component and exact chi factorization") {
  const BasisSet basis = build_basis(1.0, 6, 64);
  // e_1 couples only through the point part: every factor is 1.
  for (const double theta : {0.0, 0.2}) {
    const std::vector<std::size_t> j = {1, 1, 1};
    const std::vector<double> s = {1.9, 1.1, 0.6};
    CHECK(h_kernel(j, s, theta, basis) == 1.0);
  }

  // General indices: the kernel is the literal product of saturated chi values.
  NormalStream rng(17);
  for (int probe = 0; probe < 500; ++probe) {
    const std::size_t m = 1 + static_cast<std::size_t>(rng.next_uniform() * 3.999);
    std::vector<std::size_t> j(m);
    for (auto& idx : j) idx = 1 + static_cast<std::size_t>(rng.next_uniform() * 5.999);
    const double theta = rng.next_uniform();
    std::vector<double> s(m);
    double cur = theta;
    for (std::size_t l = m; l-- > 0;) {
      cur += rng.next_uniform();  // strictly increasing away from theta
      s[l] = cur;
    }
    double manual = chi_saturated(j[m - 1], theta - s[m - 1], basis);
    for (std::size_t l = 0; l + 1 < m; ++l) manual *= chi_saturated(j[l], s[l + 1] - s[l], basis);
    CHECK(h_kernel(j, s, theta, basis) == doctest::Approx(manual).epsilon(1e-14));
  }
}

TEST_CASE("difference kernel: collapse at equal arguments and h-difference identity") {
  const BasisSet basis = build_basis(1.0, 6, 64);
  NormalStream rng(23);
  for (int probe = 0; probe < 500; ++probe) {
    const std::size_t m = 1 + static_cast<std::size_t>(rng.next_uniform() * 3.999);
    std::vector<std::size_t> j(m);
    for (auto& idx : j) idx = 1 + static_cast<std::size_t>(rng.next_uniform() * 5.999);
    const double theta = 0.3 * rng.next_uniform();
    const double theta_p = theta + 0.5 * rng.next_uniform();
    std::vector<double> s(m);
    double cur = std::max(theta, theta_p);
    for (std::size_t l = m; l-- > 0;) {
      cur += rng.next_uniform();
      s[l] = cur;
    }
    CHECK(h_tilde_kernel(j, s, theta, theta, basis) == 0.0);
    const double diff = h_kernel(j, s, theta, basis) - h_kernel(j, s, theta_p, basis);
    CHECK(h_tilde_kernel(j, s, theta, theta_p, basis) == doctest::Approx(diff).epsilon(1e-13));
  }
}

TEST_CASE("kernel magnitude bounds across saturating probes") {
  const double r = 1.0;
  const BasisSet basis = build_basis(r, 6, 64);
  NormalStream rng(47);
  for (int probe = 0; probe < 4000; ++probe) {
    const std::size_t m = 1 + static_cast<std::size_t>(rng.next_uniform() * 3.999);
    std::vector<std::size_t> j(m);
    for (auto& idx : j) idx = 1 + static_cast<std::size_t>(rng.next_uniform() * 5.999);
    const double theta = rng.next_uniform();
    const double theta_p = theta + rng.next_uniform();  // spreads past the window
    std::vector<double> s(m);
    double cur = theta_p;
    for (std::size_t l = m; l-- > 0;) {
      cur += 0.8 * rng.next_uniform();
      s[l] = cur;
    }
    const double bound_h = std::pow(1.0 + r, static_cast<double>(m));
    CHECK(std::abs(h_kernel(j, s, theta, basis)) <= bound_h + 1e-9);
    const double bound_tilde = std::pow(1.0 + r, static_cast<double>(m) - 1.0) *
                               std::sqrt(theta_p - theta);
    CHECK(std::abs(h_tilde_kernel(j, s, theta, theta_p, basis)) <= bound_tilde + 1e-9);
  }
}

TEST_CASE("series constant: canonical value and parameter scalings") {
  const double canonical = compute_Aj(1.0, 0.5, 1.0, 1.0, 1.0);
  CHECK(canonical == doctest::Approx(96.0 * std::sqrt(2.0)).epsilon(1e-13));
  CHECK(canonical == doctest::Approx(135.76450198781713).epsilon(1e-13));

  // Linear in the L1 norm, cubic in 1/w, 3/2 power in 1/C, linear in 1 + r.
  CHECK(compute_Aj(1.0, 0.5, 1.0, 1.0, 2.0) == doctest::Approx(2.0 * canonical).epsilon(1e-13));
  CHECK(compute_Aj(1.0, 0.5, 1.0, 0.5, 1.0) == doctest::Approx(8.0 * canonical).epsilon(1e-13));
  CHECK(compute_Aj(1.0, 0.5, 4.0, 1.0, 1.0) == doctest::Approx(canonical / 8.0).epsilon(1e-13));
  CHECK(compute_Aj(3.0, 0.5, 1.0, 1.0, 1.0) == doctest::Approx(2.0 * canonical).epsilon(1e-13));
  // Gamma(1) / Gamma(1/2) = 1 / sqrt(pi).
  CHECK(compute_Aj(1.0, 1.0, 1.0, 1.0, 1.0) ==
        doctest::Approx(canonical / std::sqrt(M_PI)).epsilon(1e-13));
}

TEST_CASE("series ceiling: exact dyadic value and defining property") {
  CHECK(l1_ceiling(1, 1.0, 0.5, 0.5, 1.0) == doctest::Approx(1.0 / 768.0).epsilon(1e-12));
  for (const std::size_t j : {1, 2, 5}) {
    const double cap = l1_ceiling(j, 1.3, 0.7, 0.8, 0.5);
    const double A = compute_Aj(1.3, 0.7, 0.8, 0.5, cap);
    CHECK(A == doctest::Approx(std::pow(2.0, -static_cast<double>(j))).epsilon(1e-12));
  }
}

TEST_CASE("assumption report: horizon, hurst, and series gates") {
  AssumptionInput in;
  in.eps = 1.0;
  in.delta_H = 1.0;
  in.delta_T = 0.5;
  in.r = 1.0;
  in.H = {0.1};
  in.w = {1.0};
  in.C = {0.5};
  in.l1 = {0.9 / 768.0};
  in.T = 0.2;

  const AssumptionReport horizon = check_assumptions(in);
  CHECK(horizon.horizon_ok);
  CHECK(horizon.T_max == doctest::Approx(0.5).epsilon(1e-12));

  in.delta_H = 0.5;
  const AssumptionReport good = check_assumptions(in);
  CHECK(good.T_max == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(good.hurst_ok);
  CHECK(good.hurst_ceiling == doctest::Approx((1.0 - 0.5) / 3.0).epsilon(1e-14));
  REQUIRE(good.A.size() == 1);
  CHECK(good.A[0] == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(good.series_ok);
  CHECK(good.combined_ok);
  CHECK(good.T_evaluated == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(good.combined_T_max == doctest::Approx(0.25).epsilon(1e-12));
  REQUIRE(good.l1_ceilings.size() == 1);
  CHECK(good.l1_ceilings[0] == doctest::Approx(1.0 / 768.0).epsilon(1e-12));
  CHECK(good.all_ok);

  AssumptionInput bad_h = in;
  bad_h.H = {0.4};
  const AssumptionReport hurst = check_assumptions(bad_h);
  CHECK_FALSE(hurst.hurst_ok);
  CHECK_FALSE(hurst.all_ok);

  AssumptionInput bad_series = in;
  bad_series.l1 = {1.2 / (96.0 * std::sqrt(2.0) * std::pow(0.5, -1.5))};
  const AssumptionReport series = check_assumptions(bad_series);
  CHECK(series.A_sum == doctest::Approx(1.2).epsilon(1e-12));
  CHECK_FALSE(series.series_ok);
  CHECK_FALSE(series.all_ok);

  AssumptionInput bad_T = in;
  bad_T.delta_T = 1.5;  // above eps^3
  CHECK_THROWS_AS((void)check_assumptions(bad_T), std::invalid_argument);
}

TEST_CASE("first-variation bound report against frozen references") {
  AssumptionInput in;
  in.eps = 1.0;
  in.delta_H = 0.5;
  in.delta_T = 0.5;
  in.r = 1.0;
  in.H = {0.1};
  in.w = {1.0};
  in.C = {1.0};
  in.l1 = {0.45 / (96.0 * std::sqrt(2.0))};  // sum A_j = 0.45
  in.T = 0.2;

  const BoundReport b = malliavin_bounds(in, 0.2, 0.05, 0.1, 0.003, 0.0, 0.225);
  CHECK(b.T == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(b.beta == doctest::Approx(0.225).epsilon(1e-14));
  CHECK(b.q == doctest::Approx(0.17428425057933376).epsilon(1e-12));
  CHECK(b.series_converges);
  CHECK(b.series_bound == doctest::Approx(0.04455080347449294).epsilon(1e-12));
  CHECK(b.pointwise_bound == doctest::Approx(0.30000027000012150).epsilon(1e-12));
  CHECK(b.I1 == doctest::Approx(0.10000009000004050).epsilon(1e-12));
  CHECK(b.I2 == doctest::Approx(0.0025000022500010125).epsilon(1e-12));
  CHECK(b.I3 == doctest::Approx(0.020000018000008100).epsilon(1e-12));
  CHECK(b.difference_bound == doctest::Approx(0.36750033075014884).epsilon(1e-12));
  CHECK(b.second_moment == doctest::Approx(0.60000108).epsilon(1e-12));
  CHECK(b.integrated_energy == doctest::Approx(0.040000036000016200).epsilon(1e-12));
  CHECK(b.energy_total == doctest::Approx(0.48000007200003240).epsilon(1e-12));
  CHECK(b.holder_double_integral == doctest::Approx(1.3666736364045897).epsilon(1e-12));

  // The series bound is the squared geometric tail: partial sums converge to it.
  double partial = 0.0, qk = 1.0;
  for (int k = 1; k <= 60; ++k) {
    qk *= b.q;
    partial += qk;
  }
  const double exp_factor = std::exp(0.003 * 0.003 * 0.2 / 2.0);
  CHECK(b.series_bound == doctest::Approx(exp_factor * partial * partial).epsilon(1e-12));

  // Default Hoelder exponent: 0.9 min(delta_H, 1/2).
  const BoundReport def = malliavin_bounds(in, 0.2, 0.05, 0.1, 0.003, 0.0);
  CHECK(def.beta == doctest::Approx(0.45).epsilon(1e-14));

  // Divergent geometric ratio: series bound becomes infinite.
  AssumptionInput wide = in;
  wide.l1 = {2.0 / (96.0 * std::sqrt(2.0))};
  const BoundReport div = malliavin_bounds(wide, 1.0, 0.0, 0.1, 0.003, 0.0, 0.225);
  CHECK_FALSE(div.series_converges);
  CHECK(std::isinf(div.series_bound));
}
