#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "sdde/rng.hpp"

namespace sdde {

/// Hurst exponents paired with summable weights: 0 < H_n < 1/2, 0 < w_n <= 1.
struct HurstWeightSpec {
  std::vector<double> H;
  std::vector<double> w;

  [[nodiscard]] std::size_t components() const noexcept { return H.size(); }
  [[nodiscard]] double weight_l1() const;
  void validate() const;
};

/// Default weight sequence w_n = 2^{-n}, n = 1..count.
[[nodiscard]] std::vector<double> dyadic_weights(std::size_t count);

/// One driving Brownian path plus the raw (unweighted) fBm component paths on
/// a shared uniform grid. All paths start at 0.
struct GaussianPathSet {
  std::vector<double> grid;  // 0 = t_0 < ... < t_M = T
  std::vector<double> W;
  std::vector<std::vector<double>> B;
  std::vector<double> w;  // weights copied from the spec
  std::uint64_t master_seed = 0;
  std::uint64_t path_id = 0;

  [[nodiscard]] double dt() const;
  [[nodiscard]] std::size_t steps() const noexcept { return grid.empty() ? 0 : grid.size() - 1; }
};

[[nodiscard]] std::vector<double> make_uniform_grid(double T, std::size_t steps);

/// Independent Gaussian increments, variance dt; W(t_0) = 0.
[[nodiscard]] std::vector<double> sample_brownian(std::span<const double> grid, NormalStream& rng);

/// Exact fBm sampling: dense Cholesky factor of R(s,t) = (s^{2H}+t^{2H}-|t-s|^{2H})/2
/// over the strictly positive grid nodes. Grid capped at 4096 nodes; on factor
/// failure a diagonal jitter up to 1e-10 * max diagonal is applied and recorded.
class FbmSampler {
 public:
  FbmSampler(double H, std::span<const double> grid);

  [[nodiscard]] std::vector<double> sample(NormalStream& rng) const;
  /// Path from a caller-supplied standard-normal vector (one per positive node).
  [[nodiscard]] std::vector<double> transform(std::span<const double> z) const;

  [[nodiscard]] double hurst() const noexcept { return H_; }
  [[nodiscard]] double jitter() const noexcept { return jitter_; }
  [[nodiscard]] std::size_t positive_nodes() const noexcept { return M_; }

 private:
  double H_;
  double jitter_ = 0.0;
  std::size_t M_ = 0;
  std::vector<double> grid_;
  std::vector<double> L_;  // row-major lower triangle, M_ x M_
};

[[nodiscard]] std::vector<double> sample_fbm(double H, std::span<const double> grid,
                                             NormalStream& rng);

/// W plus one raw fBm path per component. Streams derive from
/// (master_seed, path_id, component); component 0 is W, component n is B_n.
/// Samplers are rebuilt per call; prefer sample_path_set_with for ensembles.
[[nodiscard]] GaussianPathSet sample_path_set(const HurstWeightSpec& spec,
                                              std::span<const double> grid,
                                              std::uint64_t master_seed, std::uint64_t path_id);

/// Same stream layout, but reuses prebuilt per-component samplers (one per
/// spec entry, grids identical). Produces bit-identical paths to sample_path_set.
[[nodiscard]] GaussianPathSet sample_path_set_with(const HurstWeightSpec& spec,
                                                   std::span<const FbmSampler> samplers,
                                                   std::span<const double> grid,
                                                   std::uint64_t master_seed,
                                                   std::uint64_t path_id);

/// Coefficient paths t -> w_n B^{H_n}(t) of the state-space perturbation; the
/// vector-valued noise is reconstructed downstream as sum_n coeff_n(t) e_n.
[[nodiscard]] std::vector<std::vector<double>> perturbation_coefficients(const GaussianPathSet& ps);

struct SLNEstimate {
  double H = 0.0;
  std::size_t m = 0;  // number of increments
  double span = 0.0;
  double c_hat = 0.0;  // smallest generalized eigenvalue, in (0, 1]
};

/// Smallest c with Var(sum_l xi_l dB_l) >= c sum_l xi_l^2 |dt_l|^{2H} over the
/// equidistant partition of [0, span] with m increments: the minimal
/// generalized eigenvalue of (increment covariance, diag|dt_l|^{2H}).
/// H = 1/2: increments independent, the ratio is identically 1.
[[nodiscard]] SLNEstimate estimate_sln_constant(double H, std::size_t m, double span);

/// Increment covariance matrix (row-major m x m) used by the estimator.
[[nodiscard]] std::vector<double> fbm_increment_covariance(double H, std::span<const double> grid);

/// CSV dump: path_id,component,time_index,value with component W or B1..BN.
void dump_paths_csv(std::ostream& os, const GaussianPathSet& ps);

}  // namespace sdde
