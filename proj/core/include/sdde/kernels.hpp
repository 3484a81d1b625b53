#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sdde/segment_space.hpp"

namespace sdde {

/// Shuffle permutations sigma of {1..m+n} with sigma increasing on {1..m} and
/// on {m+1..m+n}. Stored 0-based: perms[k][i] = sigma(i+1) - 1. Ordered
/// lexicographically by the position set sigma({1..m}).
struct ShuffleSet {
  std::size_t m = 0, n = 0;
  std::vector<std::vector<std::size_t>> perms;

  [[nodiscard]] std::size_t size() const noexcept { return perms.size(); }
};

/// All binomial(m+n, m) shuffles; m + n <= 12 (enumeration cost cap).
[[nodiscard]] ShuffleSet shuffles(std::size_t m, std::size_t n);

/// Monomial in simplex variables: f(x_1..x_k) = prod_i x_i^{powers[i]}.
struct MonomialSpec {
  std::vector<unsigned> powers;

  [[nodiscard]] std::size_t arity() const noexcept { return powers.size(); }
};

/// |LHS - RHS| of the shuffle identity: the product of the two simplex
/// integrals of f over Delta^m and g over Delta^n versus the sum over all
/// shuffles of the merged integral over Delta^{m+n}. Both sides evaluated by
/// nested Gauss-Legendre quadrature whose order is sized to the accumulated
/// monomial degree, so every admitted case integrates exactly. m + n <= 6.
[[nodiscard]] double shuffle_product_check(const MonomialSpec& f, const MonomialSpec& g,
                                           std::size_t m, std::size_t n, double theta, double t);

/// Index map for the squared-integral identity: position l of the doubled
/// product is sent to sigma(l), 2m + tau(l - m), sigma(l - n), or
/// 2m + tau(l - 2m) on the four consecutive ranges of length m, n, m, n.
/// sigma must shuffle (m, m) and tau (n, n), both rows in the 0-based
/// ShuffleSet storage; the returned map is 0-based as well.
[[nodiscard]] std::vector<std::size_t> square_index_map(std::span<const std::size_t> sigma,
                                                        std::span<const std::size_t> tau,
                                                        std::size_t m, std::size_t n);

/// |LHS - RHS| for the squared integral of f over Delta^m_{theta_p,t} x
/// Delta^n_{theta,theta_p} versus the sum over S(m,m) x S(n,n) of doubled
/// integrals over Delta^{2m}_{theta_p,t} x Delta^{2n}_{theta,theta_p}.
/// f takes m + n arguments; 2(m + n) <= 8.
[[nodiscard]] double shuffle_square_check(const MonomialSpec& f, std::size_t m, std::size_t n,
                                          double theta, double theta_p, double t);

/// Simplex Delta^m_{theta,t} = {theta <= s_m < ... < s_1 <= t} and the
/// integrand prod_{j=1}^m (s_j - s_{j+1})^{a_j} with s_{m+1} = theta.
struct SimplexSpec {
  std::vector<double> a;  // each > -1
  double theta = 0.0;
  double t = 1.0;

  [[nodiscard]] std::size_t m() const noexcept { return a.size(); }
  void validate() const;
};

/// prod_l Gamma(a_l + 1) / Gamma(sum a_l + m + 1) * (t - theta)^{sum a_l + m},
/// evaluated in log-Gamma arithmetic.
[[nodiscard]] double simplex_integral_closed(const SimplexSpec& spec);

/// Product kernel chi_{j_m}(theta - s_m) * prod_{l=1}^{m-1} chi_{j_l}(s_{l+1} - s_l)
/// on descending simplex points s_1 > ... > s_m >= theta. chi saturates below
/// -r (full-window indicator). Indices are 1-based basis positions.
[[nodiscard]] double h_kernel(std::span<const std::size_t> j, std::span<const double> s,
                              double theta, const BasisSet& basis);

/// Same but the last factor becomes chi_{j_m}(theta - s_m) - chi_{j_m}(theta' - s_m).
[[nodiscard]] double h_tilde_kernel(std::span<const std::size_t> j, std::span<const double> s,
                                    double theta, double theta_p, const BasisSet& basis);

}  // namespace sdde
