#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "sdde/assumptions.hpp"
#include "sdde/drift.hpp"

using namespace sdde;

TEST_CASE("bump is normalized, compactly supported, and matches its derivative") {
  // Independent quadrature of the bump itself.
  const double mass =
      oracle::adaptive_simpson([](double z) { return mollifier_bump(z); }, -1.0, 1.0, 1e-13);
  CHECK(std::abs(mass - 1.0) <= 1e-10);

  // Frozen normalizer c = 1 / int exp(-1/(1-z^2)): bump(0) = c / e.
  const double c = 2.2522836210435810;
  CHECK(mollifier_bump(0.0) == doctest::Approx(c * std::exp(-1.0)).epsilon(1e-13));

  CHECK(mollifier_bump(1.0) == 0.0);
  CHECK(mollifier_bump(-1.0) == 0.0);
  CHECK(mollifier_bump(1.7) == 0.0);
  CHECK(mollifier_bump(0.4) == mollifier_bump(-0.4));

  for (const double z : {0.0, 0.3, -0.55, 0.9}) {
    const double h = 1e-6;
    const double fd = (mollifier_bump(z + h) - mollifier_bump(z - h)) / (2.0 * h);
    CHECK(std::abs(mollifier_bump_deriv(z) - fd) <= 1e-7 * (1.0 + std::abs(fd)));
  }
}

TEST_CASE("mollified indicator matches the exact convolution") {
  const DriftComponent step = drift_step(1.0, 0.0, 1.0);
  const MollifiedComponent m = mollify(step, 2);

  // Exact convolution value of 1_[0,1] * phi_2 at z = 0.1 (the table is
  // linearly interpolated, so agreement is limited by the node spacing).
  CHECK(std::abs(m.eval(0.1) - 0.66347748656803156) <= 1e-6);
  // Center of the plateau: the full bump mass is inside the indicator.
  CHECK(std::abs(m.eval(0.5) - 1.0) <= 1e-9);
  // Midpoint of each edge ramp is exactly half the height by symmetry.
  CHECK(std::abs(m.eval(0.0) - 0.5) <= 1e-9);
  CHECK(std::abs(m.eval(1.0) - 0.5) <= 1e-9);
  // Symmetry of the two ramps about z = 1/2.
  CHECK(std::abs(m.eval(0.2) - m.eval(0.8)) <= 1e-6);
  // Outside the enlarged support the table is exactly zero.
  CHECK(m.eval(-0.6) == 0.0);
  CHECK(m.eval(1.6) == 0.0);
  CHECK(m.eval(100.0) == 0.0);
}

TEST_CASE("mollification contracts sup and preserves L1 mass") {
  const DriftComponent step = drift_step(2.0, -0.5, 1.5);
  for (const int n : {1, 2, 8}) {
    const MollifiedComponent m = mollify(step, n);
    CHECK(m.sup_norm <= step.sup_norm + 1e-12);
    // Convolution with a unit-mass kernel preserves the integral; the table
    // trapezoid reproduces it to quadrature accuracy.
    CHECK(std::abs(m.l1_norm - step.l1_norm) <= 1e-6);
  }
}

TEST_CASE("mollification converges pointwise away from discontinuities") {
  const DriftComponent step = drift_step(1.0, 0.0, 1.0);
  double prev = 1.0;
  for (const int n : {4, 16, 64}) {
    const MollifiedComponent m = mollify(step, n);
    const double err = std::abs(m.eval(0.3) - 1.0);
    CHECK(err <= prev + 1e-12);
    prev = err;
  }
  // At distance 0.3 > 1/64 from the jump the bump no longer overlaps it.
  CHECK(std::abs(mollify(step, 64).eval(0.3) - 1.0) <= 1e-9);
  CHECK(std::abs(mollify(step, 64).eval(-0.3)) <= 1e-9);
}

TEST_CASE("lipschitz estimate grows linearly with the level on a jump") {
  const DriftComponent step = drift_step(1.0, 0.0, 1.0);
  const double l2 = lipschitz_estimate(mollify(step, 2));
  const double l8 = lipschitz_estimate(mollify(step, 8));
  CHECK(l8 > 3.0 * l2);
  CHECK(l8 < 5.0 * l2);
  // Max of n * phi'(u) over u is attained at the same u for every n.
  CHECK(l2 > 0.0);
}

TEST_CASE("derivative table integrates back to the value table") {
  const MollifiedComponent m = mollify(drift_step(1.0, 0.0, 1.0), 3);
  // Trapezoid of eval_deriv from the left support edge reproduces eval.
  const double a = m.lo, b = 0.37;
  const std::size_t steps = 4000;
  const double h = (b - a) / static_cast<double>(steps);
  double acc = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double z0 = a + h * static_cast<double>(k);
    acc += 0.5 * h * (m.eval_deriv(z0) + m.eval_deriv(z0 + h));
  }
  CHECK(std::abs(acc - m.eval(b)) <= 1e-5);
}

TEST_CASE("component library: step, comb, gaussian metadata") {
  const DriftComponent step = drift_step(-1.5, -2.0, 1.0);
  CHECK(step.sup_norm == 1.5);
  CHECK(step.l1_norm == doctest::Approx(4.5).epsilon(1e-15));
  CHECK(step.support_radius == 2.0);
  CHECK(step.f(0.0) == -1.5);
  CHECK(step.f(1.1) == 0.0);

  const DriftComponent comb = drift_comb(1.0, 0.0, 1.0, 4);
  CHECK(comb.f(0.1) == 1.0);
  CHECK(comb.f(0.3) == -1.0);
  CHECK(comb.f(0.6) == 1.0);
  CHECK(comb.f(0.9) == -1.0);
  CHECK(comb.sup_norm == 1.0);

  const DriftComponent g = drift_gaussian_bump(2.0, 0.5, 0.3, 1.0);
  CHECK(g.f(0.5) == 2.0);
  CHECK(g.f(2.0) == 0.0);
  CHECK(g.sup_norm == 2.0);
  // Truncated-Gaussian mass against independent quadrature.
  const double mass = oracle::adaptive_simpson([&](double z) { return std::abs(g.f(z)); },
                                               -0.5, 1.5, 1e-12);
  CHECK(std::abs(g.l1_norm - mass) <= 1e-9);
}

TEST_CASE("admissible step realizes the dyadic L1 ceiling") {
  const double margin = 0.9;
  const DriftComponent c = drift_admissible_step(1, 1.0, 0.5, 0.5, 1.0, margin, 0.0, 0.5);
  // l1_ceiling(1, r=1, delta_H=1/2, C=1/2, w=1) = 1/768 exactly.
  CHECK(std::abs(l1_ceiling(1, 1.0, 0.5, 0.5, 1.0) - 1.0 / 768.0) <= 1e-18);
  CHECK(std::abs(c.l1_norm - margin / 768.0) <= 1e-15);
  CHECK(c.sup_norm == doctest::Approx(margin / 768.0 / 0.5).epsilon(1e-12));

  // The realized component saturates the series criterion at the margin.
  const double A = compute_Aj(1.0, 0.5, 0.5, 1.0, c.l1_norm);
  CHECK(std::abs(A - margin * 0.5) <= 1e-13);
}

TEST_CASE("dimension truncation keeps d components and cuts the tails") {
  DriftSpec spec;
  spec.comps.push_back(drift_step(1.0, -3.0, 3.0));
  spec.comps.push_back(drift_step(2.0, -3.0, 3.0));
  spec.comps.push_back(drift_step(3.0, -3.0, 3.0));
  const DriftSpec cut = truncate_dimension(spec, 2);
  REQUIRE(cut.dimension() == 2);
  CHECK(cut.comps[0].f(1.9) == 1.0);
  CHECK(cut.comps[0].f(2.1) == 0.0);  // cutoff 1_[-2,2]
  CHECK(cut.comps[1].f(-1.5) == 2.0);
  CHECK(cut.comps[1].f(2.5) == 0.0);
  CHECK(cut.comps[0].support_radius <= 2.0 + 1e-15);
}

TEST_CASE("drift evaluation sums components at shifted arguments") {
  DriftSpec spec;
  spec.comps.push_back(drift_step(1.0, 0.0, 1.0));
  spec.comps.push_back(drift_step(-2.0, 0.0, 1.0));
  const std::vector<double> z = {0.2, 0.3};
  const std::vector<double> shift = {0.5, 10.0};
  // First argument 0.7 inside, second 10.3 outside.
  CHECK(eval_drift(spec, z, shift) == 1.0);
  const MollifiedDrift m = mollify(spec, 4);
  CHECK(std::abs(eval_drift(m, z, shift) - 1.0) <= 1e-9);
  CHECK(m.sup_norm_sum() == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("json drift descriptions round-trip and reject unknown keys") {
  const DriftSpec spec = drift_from_json(R"({"components": [
    {"kind": "step", "height": 0.5, "a": -1.0, "b": 1.0},
    {"kind": "comb", "height": 1.0, "a": 0.0, "b": 2.0, "teeth": 4},
    {"kind": "gaussian", "amp": 0.3, "center": 0.0, "width": 0.5, "radius": 1.5},
    {"kind": "admissible_step", "j": 1, "r": 1.0, "delta_H": 0.5, "C": 0.5,
     "w": 1.0, "margin": 0.9, "a": 0.0, "b": 0.5}
  ]})");
  REQUIRE(spec.dimension() == 4);
  CHECK(spec.comps[0].f(0.0) == 0.5);
  CHECK(spec.comps[1].f(0.6) == -1.0);
  CHECK(spec.comps[2].sup_norm == 0.3);
  CHECK(std::abs(spec.comps[3].l1_norm - 0.9 / 768.0) <= 1e-15);

  CHECK_THROWS_AS((void)drift_from_json(R"({"components": [
    {"kind": "step", "height": 1.0, "a": 0.0, "b": 1.0, "slope": 2.0}]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)drift_from_json(R"({"components": [{"kind": "sawtooth"}]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)drift_from_json(R"({"components": [
    {"kind": "step", "height": 1.0, "a": 0.0}]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)drift_from_json("not json"), std::invalid_argument);
}

TEST_CASE("mollify validates its inputs") {
  DriftComponent unbounded;
  unbounded.f = [](double) { return 1.0; };
  unbounded.sup_norm = 1.0;
  unbounded.l1_norm = 1.0;  // support_radius stays infinite
  CHECK_THROWS_AS((void)mollify(unbounded, 2), std::invalid_argument);
  CHECK_THROWS_AS((void)mollify(drift_step(1.0, 0.0, 1.0), 0), std::invalid_argument);
}
