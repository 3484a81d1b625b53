#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace sdde {

/// One scalar drift component: bounded, integrable, compactly supported.
/// support_radius may be infinity for purely analytic uses; mollification and
/// the solver require it finite.
struct DriftComponent {
  std::function<double(double)> f;
  double sup_norm = 0.0;
  double l1_norm = 0.0;
  double support_radius = std::numeric_limits<double>::infinity();
  std::string label;

  void validate() const;
};

struct DriftSpec {
  std::vector<DriftComponent> comps;

  [[nodiscard]] std::size_t dimension() const noexcept { return comps.size(); }
  [[nodiscard]] double sup_norm_sum() const;     // M = sum_i ||b_i||_inf
  [[nodiscard]] double sup_norm_sq_sum() const;  // sum_i ||b_i||_inf^2
  void validate() const;
};

/// b_{i,n} = b_i * phi_n tabulated with its derivative on a uniform grid over
/// the support enlarged by 1/n. Linear interpolation between nodes, zero
/// outside. Values are clipped to +-sup of the base component: the exact
/// convolution obeys that bound, clipping only removes quadrature noise.
struct MollifiedComponent {
  int level = 0;  // n
  double lo = 0.0, hi = 0.0, dx = 0.0;
  std::vector<double> val, dval;
  double sup_norm = 0.0;   // max |val|
  double l1_norm = 0.0;    // trapezoid of |val|
  double lipschitz = 0.0;  // max |dval|
  std::string label;

  [[nodiscard]] double eval(double z) const noexcept;
  [[nodiscard]] double eval_deriv(double z) const noexcept;
};

struct MollifiedDrift {
  int level = 0;
  std::vector<MollifiedComponent> comps;

  [[nodiscard]] std::size_t dimension() const noexcept { return comps.size(); }
  [[nodiscard]] double sup_norm_sum() const;
};

/// Normalized bump: phi(z) = c exp(-1/(1-z^2)) on (-1,1), integral 1.
[[nodiscard]] double mollifier_bump(double z) noexcept;
[[nodiscard]] double mollifier_bump_deriv(double z) noexcept;

[[nodiscard]] MollifiedComponent mollify(const DriftComponent& b, int n,
                                         std::size_t table_points = 2048);
[[nodiscard]] MollifiedDrift mollify(const DriftSpec& spec, int n,
                                     std::size_t table_points = 2048);

/// Keeps components i <= d, each multiplied by the cutoff 1_[-d,d](z).
[[nodiscard]] DriftSpec truncate_dimension(const DriftSpec& spec, std::size_t d);

/// sum_i b_i(z_i + shift_i); vectors must match the component count.
[[nodiscard]] double eval_drift(const DriftSpec& spec, std::span<const double> z,
                                std::span<const double> shift);
[[nodiscard]] double eval_drift(const MollifiedDrift& drift, std::span<const double> z,
                                std::span<const double> shift);

/// max |b'_{i,n}| over the tabulation grid, per component.
[[nodiscard]] double lipschitz_estimate(const MollifiedComponent& c) noexcept;
[[nodiscard]] std::vector<double> lipschitz_estimate(const MollifiedDrift& drift);

// Built-in component library.

/// height * 1_[a,b].
[[nodiscard]] DriftComponent drift_step(double height, double a, double b);
/// Alternating +-height on `teeth` equal subintervals of [a,b].
[[nodiscard]] DriftComponent drift_comb(double height, double a, double b, std::size_t teeth);
/// amp * exp(-(z-center)^2 / (2 width^2)) cut to |z-center| <= radius.
[[nodiscard]] DriftComponent drift_gaussian_bump(double amp, double center, double width,
                                                 double radius);
/// Step on [a,b] with the largest height admissible at component index j:
/// ||b_j||_L1 = margin * sqrt(pi) 2^{-j} C_j^{3/2} w_j^3 / (48 sqrt(2) (1+r) Gamma(delta_H)).
/// With the full dyadic ceiling sequence this keeps sum_j A_j <= margin < 1.
[[nodiscard]] DriftComponent drift_admissible_step(std::size_t j, double r, double delta_H,
                                                   double C_j, double w_j, double margin,
                                                   double a, double b);

/// JSON description -> spec. Unknown keys rejected. Schema:
/// {"components":[{"kind":"step","height":..,"a":..,"b":..} |
///                {"kind":"comb","height":..,"a":..,"b":..,"teeth":..} |
///                {"kind":"gaussian","amp":..,"center":..,"width":..,"radius":..} |
///                {"kind":"admissible_step","j":..,"r":..,"delta_H":..,"C":..,
///                 "w":..,"margin":..,"a":..,"b":..}]}
[[nodiscard]] DriftSpec drift_from_json(const std::string& text);

}  // namespace sdde
