#include "sdde/drift.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdde {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double raw_bump(double z) noexcept {
  const double d = 1.0 - z * z;
  if (d <= 0.0) return 0.0;
  return std::exp(-1.0 / d);
}

/// Adaptive Simpson on [a, b]; fn must be smooth inside each invocation range.
template <typename F>
double adaptive_simpson(const F& fn, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = fn(lm), frm = fn(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(fn, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(fn, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

/// Composite adaptive Simpson: 32 uniform panels refined independently, so
/// integrand support narrower than a panel is still seen by at least one
/// panel's interior samples instead of vanishing between the initial probes.
template <typename F>
double integrate(const F& fn, double a, double b, double tol = 1e-10) {
  if (!(b > a)) return 0.0;
  constexpr int kPanels = 32;
  const double h = (b - a) / kPanels;
  double acc = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double pa = a + h * p, pb = p + 1 == kPanels ? b : a + h * (p + 1);
    const double m = 0.5 * (pa + pb);
    const double fa = fn(pa), fm = fn(m), fb = fn(pb);
    const double whole = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
    acc += adaptive_simpson(fn, pa, pb, fa, fm, fb, whole, tol / kPanels, 42);
  }
  return acc;
}

double bump_normalizer() {
  // 1 / integral of exp(-1/(1-z^2)) over (-1,1), evaluated once.
  static const double c = [] {
    const double raw = integrate([](double z) { return raw_bump(z); }, -1.0, 1.0, 1e-14);
    return 1.0 / raw;
  }();
  return c;
}

}  // namespace

void DriftComponent::validate() const {
  require(static_cast<bool>(f), "DriftComponent: missing function");
  require(sup_norm >= 0.0 && std::isfinite(sup_norm), "DriftComponent: bad sup norm");
  require(l1_norm >= 0.0 && std::isfinite(l1_norm), "DriftComponent: bad L1 norm");
  require(support_radius > 0.0, "DriftComponent: bad support radius");
}

double DriftSpec::sup_norm_sum() const {
  double acc = 0.0;
  for (const auto& c : comps) acc += c.sup_norm;
  return acc;
}

double DriftSpec::sup_norm_sq_sum() const {
  double acc = 0.0;
  for (const auto& c : comps) acc += c.sup_norm * c.sup_norm;
  return acc;
}

void DriftSpec::validate() const {
  require(!comps.empty(), "DriftSpec: no components");
  for (const auto& c : comps) c.validate();
}

double mollifier_bump(double z) noexcept { return bump_normalizer() * raw_bump(z); }

double mollifier_bump_deriv(double z) noexcept {
  const double d = 1.0 - z * z;
  if (d <= 0.0) return 0.0;
  // d/dz exp(-1/d) = exp(-1/d) * (-2z / d^2).
  return bump_normalizer() * std::exp(-1.0 / d) * (-2.0 * z) / (d * d);
}

double MollifiedComponent::eval(double z) const noexcept {
  if (z <= lo || z >= hi) return 0.0;
  const double u = (z - lo) / dx;
  const auto k = static_cast<std::size_t>(u);
  if (k + 1 >= val.size()) return val.back();
  const double frac = u - static_cast<double>(k);
  return val[k] + frac * (val[k + 1] - val[k]);
}

double MollifiedComponent::eval_deriv(double z) const noexcept {
  if (z <= lo || z >= hi) return 0.0;
  const double u = (z - lo) / dx;
  const auto k = static_cast<std::size_t>(u);
  if (k + 1 >= dval.size()) return dval.back();
  const double frac = u - static_cast<double>(k);
  return dval[k] + frac * (dval[k + 1] - dval[k]);
}

double MollifiedDrift::sup_norm_sum() const {
  double acc = 0.0;
  for (const auto& c : comps) acc += c.sup_norm;
  return acc;
}

MollifiedComponent mollify(const DriftComponent& b, int n, std::size_t table_points) {
  b.validate();
  require(n >= 1, "mollify: level must be >= 1");
  require(std::isfinite(b.support_radius), "mollify: component needs finite support");
  require(table_points >= 16, "mollify: table too small");

  MollifiedComponent out;
  out.level = n;
  out.label = b.label;
  const double pad = 1.0 / static_cast<double>(n);
  out.lo = -b.support_radius - pad;
  out.hi = b.support_radius + pad;
  out.dx = (out.hi - out.lo) / static_cast<double>(table_points - 1);
  out.val.resize(table_points);
  out.dval.resize(table_points);

  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < table_points; ++k) {
    const double z = out.lo + out.dx * static_cast<double>(k);
    const double v = integrate(
        [&](double u) { return b.f(z - u * inv_n) * mollifier_bump(u); }, -1.0, 1.0);
    const double dv = integrate(
        [&](double u) {
          return b.f(z - u * inv_n) * static_cast<double>(n) * mollifier_bump_deriv(u);
        },
        -1.0, 1.0);
    out.val[k] = std::clamp(v, -b.sup_norm, b.sup_norm);
    out.dval[k] = dv;
  }

  out.sup_norm = 0.0;
  out.lipschitz = 0.0;
  double l1 = 0.0;
  for (std::size_t k = 0; k < table_points; ++k) {
    out.sup_norm = std::max(out.sup_norm, std::abs(out.val[k]));
    out.lipschitz = std::max(out.lipschitz, std::abs(out.dval[k]));
    const double w = (k == 0 || k + 1 == table_points) ? 0.5 : 1.0;
    l1 += w * std::abs(out.val[k]);
  }
  out.l1_norm = l1 * out.dx;
  return out;
}

MollifiedDrift mollify(const DriftSpec& spec, int n, std::size_t table_points) {
  spec.validate();
  MollifiedDrift out;
  out.level = n;
  out.comps.reserve(spec.comps.size());
  for (const auto& c : spec.comps) out.comps.push_back(mollify(c, n, table_points));
  return out;
}

DriftSpec truncate_dimension(const DriftSpec& spec, std::size_t d) {
  spec.validate();
  require(d >= 1, "truncate_dimension: d must be >= 1");
  DriftSpec out;
  const std::size_t keep = std::min(d, spec.comps.size());
  const double cut = static_cast<double>(d);
  out.comps.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    const DriftComponent& base = spec.comps[i];
    DriftComponent c = base;
    c.f = [f = base.f, cut](double z) { return (std::abs(z) <= cut) ? f(z) : 0.0; };
    c.support_radius = std::min(base.support_radius, cut);
    c.label = base.label + "|trunc";
    out.comps.push_back(std::move(c));
  }
  return out;
}

double eval_drift(const DriftSpec& spec, std::span<const double> z,
                  std::span<const double> shift) {
  require(z.size() == spec.comps.size() && shift.size() == spec.comps.size(),
          "eval_drift: argument length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.comps.size(); ++i) acc += spec.comps[i].f(z[i] + shift[i]);
  return acc;
}

double eval_drift(const MollifiedDrift& drift, std::span<const double> z,
                  std::span<const double> shift) {
  require(z.size() == drift.comps.size() && shift.size() == drift.comps.size(),
          "eval_drift: argument length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < drift.comps.size(); ++i)
    acc += drift.comps[i].eval(z[i] + shift[i]);
  return acc;
}

double lipschitz_estimate(const MollifiedComponent& c) noexcept { return c.lipschitz; }

std::vector<double> lipschitz_estimate(const MollifiedDrift& drift) {
  std::vector<double> out(drift.comps.size());
  for (std::size_t i = 0; i < drift.comps.size(); ++i) out[i] = drift.comps[i].lipschitz;
  return out;
}

DriftComponent drift_step(double height, double a, double b) {
  require(b > a, "drift_step: need b > a");
  DriftComponent c;
  c.f = [height, a, b](double z) { return (z >= a && z <= b) ? height : 0.0; };
  c.sup_norm = std::abs(height);
  c.l1_norm = std::abs(height) * (b - a);
  c.support_radius = std::max(std::abs(a), std::abs(b));
  c.label = "step";
  return c;
}

DriftComponent drift_comb(double height, double a, double b, std::size_t teeth) {
  require(b > a && teeth >= 1, "drift_comb: need b > a and teeth >= 1");
  DriftComponent c;
  const double width = (b - a) / static_cast<double>(teeth);
  c.f = [height, a, b, width](double z) {
    if (z < a || z > b) return 0.0;
    auto k = static_cast<long long>((z - a) / width);
    return (k % 2 == 0) ? height : -height;
  };
  c.sup_norm = std::abs(height);
  c.l1_norm = std::abs(height) * (b - a);
  c.support_radius = std::max(std::abs(a), std::abs(b));
  c.label = "comb";
  return c;
}

DriftComponent drift_gaussian_bump(double amp, double center, double width, double radius) {
  require(width > 0.0 && radius > 0.0, "drift_gaussian_bump: need width > 0 and radius > 0");
  DriftComponent c;
  c.f = [amp, center, width, radius](double z) {
    const double d = z - center;
    if (std::abs(d) > radius) return 0.0;
    return amp * std::exp(-d * d / (2.0 * width * width));
  };
  c.sup_norm = std::abs(amp);
  // Truncated Gaussian mass: amp * width * sqrt(2 pi) * erf(radius / (width sqrt 2)).
  c.l1_norm = std::abs(amp) * width * std::sqrt(2.0 * M_PI) *
              std::erf(radius / (width * std::sqrt(2.0)));
  c.support_radius = std::abs(center) + radius;
  c.label = "gaussian";
  return c;
}

DriftComponent drift_admissible_step(std::size_t j, double r, double delta_H, double C_j,
                                     double w_j, double margin, double a, double b) {
  require(j >= 1, "drift_admissible_step: component index starts at 1");
  require(r > 0.0 && delta_H > 0.0 && delta_H <= 1.0, "drift_admissible_step: bad r/delta_H");
  require(C_j > 0.0 && w_j > 0.0, "drift_admissible_step: bad C_j/w_j");
  require(margin > 0.0 && margin <= 1.0, "drift_admissible_step: margin must lie in (0,1]");
  require(b > a, "drift_admissible_step: need b > a");
  const double ceiling = std::sqrt(M_PI) * std::pow(2.0, -static_cast<double>(j)) *
                         std::pow(C_j, 1.5) * std::pow(w_j, 3.0) /
                         (48.0 * std::sqrt(2.0) * (1.0 + r) * std::tgamma(delta_H));
  const double height = margin * ceiling / (b - a);
  DriftComponent c = drift_step(height, a, b);
  c.label = "admissible_step";
  return c;
}

}  // namespace sdde
