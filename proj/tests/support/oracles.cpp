#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "sdde/segment_space.hpp"

namespace oracle {

namespace {

void need(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

const TanhSinhRule& tanh_sinh(int level) {
  need(level >= 3 && level <= 7, "tanh_sinh: level out of range");
  static std::map<int, TanhSinhRule> cache;
  auto it = cache.find(level);
  if (it != cache.end()) return it->second;

  TanhSinhRule rule;
  const double h = std::ldexp(1.0, -level);
  const double half_pi = std::asin(1.0);
  // Both endpoint distances are kept down to 1e-150: an algebraic endpoint
  // singularity u^a with a >= -0.9 then loses tail mass of at most
  // (1e-150)^{0.1} = 1e-15 relative.  Computing hi through its own logistic
  // form keeps the upper tail exact instead of cancelling in 1 - lo.
  for (int j = -(64 << level); j <= (64 << level); ++j) {
    const double y = half_pi * std::sinh(j * h);
    const double lo = 1.0 / (std::exp(2.0 * y) + 1.0);   // (1 - tanh y) / 2
    const double hi = 1.0 / (std::exp(-2.0 * y) + 1.0);  // (1 + tanh y) / 2
    // d tanh(pi/2 sinh)/dj * h, with sech^2 y = 4 lo hi, halved for the
    // (-1,1) -> (0,1) map.
    const double w = 0.5 * h * half_pi * std::cosh(j * h) * 4.0 * lo * hi;
    if (lo < 1e-150 || hi < 1e-150) continue;
    rule.lo.push_back(lo);
    rule.hi.push_back(hi);
    rule.w.push_back(w);
  }
  return cache.emplace(level, std::move(rule)).first->second;
}

namespace {

// W_k(x) = int_0^x (x - v)^{a_k} W_{k+1}(v) dv, W_m(x) = x^{a_m}.  Arguments
// below 1e-150 are dropped: that branch mass is bounded by x^{1 + min a},
// ~1e-15 here, and the floor keeps gap = x * lo >= 1e-300 representable,
// so pow never sees a zero base with a negative exponent.
double w_recursive(std::span<const double> a, std::size_t k, double x, const TanhSinhRule& rule) {
  if (k + 1 == a.size()) return std::pow(x, a[k]);
  double acc = 0.0;
  for (std::size_t j = 0; j < rule.w.size(); ++j) {
    const double v = x * rule.hi[j];
    if (v < 1e-150) continue;
    const double gap = x * rule.lo[j];
    acc += rule.w[j] * std::pow(gap, a[k]) * w_recursive(a, k + 1, v, rule);
  }
  return x * acc;
}

}  // namespace

double simplex_recursive(std::span<const double> a, double theta, double t, int level) {
  need(!a.empty(), "simplex_recursive: empty exponents");
  need(t > theta, "simplex_recursive: need t > theta");
  for (double aj : a) need(aj > -1.0, "simplex_recursive: exponent <= -1");
  const TanhSinhRule& rule = tanh_sinh(level);
  const double X = t - theta;
  if (a.size() == 1) {
    double acc = 0.0;
    for (std::size_t j = 0; j < rule.w.size(); ++j)
      acc += rule.w[j] * std::pow(X * rule.hi[j], a[0]);
    return X * acc;
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < rule.w.size(); ++j) {
    const double x = X * rule.hi[j];
    if (x < 1e-150) continue;
    acc += rule.w[j] * w_recursive(a, 0, x, rule);
  }
  return X * acc;
}

namespace {

using Poly = std::vector<double>;  // coefficients over v^k, v = s - theta

/// P(v) * (theta + v)^p via binomial expansion; all terms nonnegative for
/// theta >= 0 and nonnegative P.
Poly mul_shifted_power(const Poly& p, double theta, unsigned pw) {
  std::vector<double> binom(pw + 1);
  binom[0] = 1.0;
  for (unsigned i = 1; i <= pw; ++i)
    binom[i] = binom[i - 1] * static_cast<double>(pw - i + 1) / static_cast<double>(i);
  Poly out(p.size() + pw, 0.0);
  for (unsigned i = 0; i <= pw; ++i) {
    const double c = binom[i] * std::pow(theta, static_cast<double>(pw - i));
    for (std::size_t k = 0; k < p.size(); ++k) out[k + i] += c * p[k];
  }
  return out;
}

Poly antiderivative(const Poly& p) {
  Poly out(p.size() + 1, 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) out[k + 1] = p[k] / static_cast<double>(k + 1);
  return out;
}

double eval_poly(const Poly& p, double v) {
  double acc = 0.0;
  for (std::size_t k = p.size(); k-- > 0;) acc = acc * v + p[k];
  return acc;
}

}  // namespace

double simplex_monomial_poly(std::span<const unsigned> powers, double theta, double t) {
  need(!powers.empty(), "simplex_monomial_poly: empty powers");
  need(t > theta && theta >= 0.0, "simplex_monomial_poly: need 0 <= theta < t");
  Poly acc = {1.0};
  for (std::size_t k = powers.size(); k-- > 0;) {
    acc = mul_shifted_power(acc, theta, powers[k]);
    acc = antiderivative(acc);
  }
  return eval_poly(acc, t - theta);
}

std::vector<std::vector<std::size_t>> brute_shuffles(std::size_t m, std::size_t n) {
  std::vector<std::size_t> perm(m + n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<std::size_t>> out;
  do {
    bool ok = true;
    for (std::size_t i = 0; i + 1 < m; ++i) ok = ok && perm[i] < perm[i + 1];
    for (std::size_t i = m; i + 1 < m + n; ++i) ok = ok && perm[i] < perm[i + 1];
    if (ok) out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

namespace {

double simpson_slice(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                   double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson_slice(a, fa, m, fm, flm);
  const double right = simpson_slice(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  return simpson_rec(f, a, fa, b, fb, m, fm, simpson_slice(a, fa, b, fb, fm), tol, 48);
}

sdde::GaussianPathSet zero_path_set(double T, std::size_t steps, std::size_t d) {
  sdde::GaussianPathSet ps;
  ps.grid = sdde::make_uniform_grid(T, steps);
  ps.W.assign(steps + 1, 0.0);
  ps.B.assign(d, std::vector<double>(steps + 1, 0.0));
  ps.w.assign(d, 1.0);
  return ps;
}

namespace {

double drift_sum(const sdde::MollifiedDrift& drift, const sdde::SolverConfig& cfg,
                 std::span<const double> x, double tk) {
  const sdde::M2Element seg = sdde::segment_extract(x, cfg.dt, tk, cfg.eta);
  double acc = 0.0;
  for (std::size_t i = 0; i < drift.dimension(); ++i)
    acc += drift.comps[i].eval(sdde::m2_inner(seg, cfg.basis.e(i + 1)));
  return acc;
}

}  // namespace

double heun_delay_terminal(const sdde::MollifiedDrift& drift, const sdde::SolverConfig& cfg) {
  cfg.validate();
  const std::size_t steps = cfg.steps();
  std::vector<double> x(steps + 1, 0.0);
  x[0] = cfg.eta.point;
  for (std::size_t k = 0; k < steps; ++k) {
    const double tk = static_cast<double>(k) * cfg.dt;
    const double fk = drift_sum(drift, cfg, std::span(x.data(), k + 1), tk);
    x[k + 1] = x[k] + cfg.dt * fk;  // predictor fills the new grid node
    const double fk1 = drift_sum(drift, cfg, std::span(x.data(), k + 2), tk + cfg.dt);
    x[k + 1] = x[k] + 0.5 * cfg.dt * (fk + fk1);
  }
  return x[steps];
}

double euler_delay_terminal(const sdde::MollifiedDrift& drift, const sdde::SolverConfig& cfg) {
  const sdde::GaussianPathSet ps = zero_path_set(cfg.T, cfg.steps(), cfg.d);
  return sdde::euler_solve(drift, ps, cfg).x[cfg.steps()];
}

double fd_first_variation(const sdde::MollifiedDrift& drift, const sdde::GaussianPathSet& ps,
                          const sdde::SolverConfig& cfg, std::size_t k_theta, double t,
                          double delta) {
  const std::size_t k_t = static_cast<std::size_t>(std::llround(t / cfg.dt));
  const double base = sdde::euler_solve(drift, ps, cfg).x[k_t];
  sdde::GaussianPathSet bumped = ps;
  for (std::size_t j = k_theta + 1; j < bumped.W.size(); ++j) bumped.W[j] += delta;
  const double pert = sdde::euler_solve(drift, bumped, cfg).x[k_t];
  return (pert - base) / delta;
}

MeanSE mean_se(std::span<const double> xs) {
  MeanSE out;
  if (xs.empty()) return out;
  for (double v : xs) out.mean += v;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double v : xs) ss += (v - out.mean) * (v - out.mean);
  out.se = std::sqrt(ss / (static_cast<double>(xs.size()) * static_cast<double>(xs.size() - 1)));
  return out;
}

}  // namespace oracle
