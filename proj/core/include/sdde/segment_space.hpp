#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sdde {

/// Element of the state space R x L2([-r,0]): a point value plus a history
/// sampled at the K+1 uniform nodes u_k = -r + k*(r/K). Node K sits at u = 0.
struct M2Element {
  double point = 0.0;
  std::vector<double> hist;
  double r = 1.0;

  [[nodiscard]] std::size_t nodes() const noexcept { return hist.size(); }
  /// K: number of grid cells; hist has K+1 samples.
  [[nodiscard]] std::size_t cells() const noexcept { return hist.size() - 1; }
  [[nodiscard]] double du() const noexcept { return r / static_cast<double>(cells()); }
  void validate() const;
};

/// <x,y> = x(0)y(0) + int_{-r}^0 x(u)y(u) du, trapezoid rule on the shared grid.
[[nodiscard]] double m2_inner(const M2Element& x, const M2Element& y);
[[nodiscard]] double m2_norm(const M2Element& x);

/// e(1) = (1, 0); e(k+1) = (0, psi_k) where psi_1 = 1/sqrt(r) and
/// psi_k(u) = sqrt(2/r) cos((k-1) pi (u+r)/r) for k >= 2. The cosine family is
/// orthonormal under the uniform trapezoid rule as long as count - 1 <= K.
struct BasisSet {
  double r = 1.0;
  std::vector<M2Element> elems;

  [[nodiscard]] std::size_t count() const noexcept { return elems.size(); }
  /// 1-based accessor mirroring analytic index conventions.
  [[nodiscard]] const M2Element& e(std::size_t i) const;
};

[[nodiscard]] BasisSet build_basis(double r, std::size_t count, std::size_t K);

/// chi_j(z) = <(1, 1_[z,0]), e_j> for z in [-r, 0]. The indicator is
/// integrated exactly against the piecewise-linear interpolant of e_j's grid
/// samples, so the boundary cell enters with its fractional coverage and
/// chi_j is continuous in z.
[[nodiscard]] double chi(std::size_t j, double z, const BasisSet& basis);

/// chi extended to all z: below -r the indicator saturates to the full window
/// [-r, 0]; z >= 0 leaves only the point coupling. Kernel evaluation reaches
/// z < -r whenever t - theta exceeds r.
[[nodiscard]] double chi_saturated(std::size_t j, double z, const BasisSet& basis);

/// Solver/segment grid contract: segments never interpolate off-grid.
struct SegmentGridConfig {
  double dt = 0.0;
  double r = 0.0;

  /// K = r/dt; throws unless r/dt is a positive integer (within 1e-9 slack).
  [[nodiscard]] std::size_t window() const;
  void validate() const;
};

/// Segment x_t of a path on [0,T] with pre-history eta: point = x(t) and
/// hist(u) = x(t+u), where x(s) = path(s) for s >= 0 and eta(s) for s < 0.
/// t must lie on the path grid and eta's spacing must equal dt.
[[nodiscard]] M2Element segment_extract(std::span<const double> path, double dt, double t,
                                        const M2Element& eta);

/// F_i(t, phi) = eta(0)e_i(0)
///             + int_{-r}^0 (1_{t+u<0} eta(t+u) + 1_{t+u>=0} eta(0)) e_i(u) du
///             + phi(0)e_i(0) + int_{-r}^0 1_{t+u>=0} phi(u) e_i(u) du,
/// trapezoid throughout; e_i(0) is the point part of e_i, e_i(u) its history.
/// For x(s) = eta(0) + W(s) and phi the time-t segment of W this reproduces
/// <x_t, e_i> on the same grid.
[[nodiscard]] double segment_functional_F(std::size_t i, double t, const M2Element& phi,
                                          const M2Element& eta, const BasisSet& basis);

}  // namespace sdde
