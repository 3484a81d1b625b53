#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sdde/drift.hpp"
#include "sdde/noise.hpp"
#include "sdde/segment_space.hpp"

namespace sdde {

/// Euler configuration. T/dt and r/dt must be integers, eps in (0,1], eta's
/// grid spacing must equal dt, and the basis must provide at least d elements.
struct SolverConfig {
  double T = 1.0;
  double dt = 0.0;
  double r = 1.0;
  double eps = 1.0;
  M2Element eta;
  BasisSet basis;
  std::size_t d = 1;
  int level = 0;  // expected mollification level; 0 = not enforced

  [[nodiscard]] std::size_t steps() const;
  [[nodiscard]] std::size_t window() const;
  void validate() const;
};

struct TrajectoryResult {
  std::vector<double> x;                     // grid values, x[0] = eta(0)
  std::vector<std::vector<double>> coeffs;   // [step k][i] = <x_{t_k}, e_{i+1}>, left points
  std::vector<double> drift_path;            // b evaluated at each left point
  std::vector<double> dW;                    // applied Brownian increments
  double sup_bound = 0.0;                    // sum_i ||b_{i,n}||_inf
};

/// x_{k+1} = x_k + b(<x_{t_k}, e_i> + eps w_i B_i(t_k)) dt + dW_k. Rejects
/// configurations whose drift is not mollified (the singular equation has no
/// Euler scheme). The bounded-drift envelope |x_k - eta(0) - W_k| <= t_k sup_bound
/// is asserted during the sweep.
[[nodiscard]] TrajectoryResult euler_solve(const MollifiedDrift& drift,
                                           const GaussianPathSet& noise,
                                           const SolverConfig& cfg);

/// First variation of x(t) with respect to the Brownian increment at theta:
/// D(theta) = 1, D(s + dt) = D(s) + sum_i b'_{i,n}(arg_i(s)) Dcoeff_i(s) dt,
/// Dcoeff_j(s) = D(s) e_j(0) + int_{-r}^0 1_{s+u >= theta} D(s+u) e_j(u) du.
/// theta > t gives 0 (adaptedness).
struct FirstVariationResult {
  double t = 0.0;
  std::vector<double> thetas;
  std::vector<double> values;            // D_theta x(t) per theta
  std::vector<std::vector<double>> D;    // per theta: D(s) on grid indices [k_theta, k_t]
  std::vector<double> gronwall_bound;    // exp(sum_i Lip_i sqrt(1+r) (t - theta))
};

[[nodiscard]] double malliavin_solve(const MollifiedDrift& drift, const TrajectoryResult& traj,
                                     const GaussianPathSet& noise, const SolverConfig& cfg,
                                     double theta, double t);

/// Batched variant sharing one trajectory; keeps the D paths for quadrature.
[[nodiscard]] FirstVariationResult malliavin_profile(const MollifiedDrift& drift,
                                                     const TrajectoryResult& traj,
                                                     const GaussianPathSet& noise,
                                                     const SolverConfig& cfg,
                                                     std::span<const double> thetas, double t);

struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

struct EnsembleConfig {
  std::vector<double> theta_probes;  // grid-aligned, ascending, at most 32
  double t_eval = 0.0;               // 0 = horizon T
  double beta = 0.0;                 // Hoelder exponent; <= 0 skips the double integral
  std::size_t threads = 0;           // 0 = hardware concurrency
  bool store_trajectories = false;
  void validate() const;
};

struct EnsembleResult {
  std::vector<int> levels;
  double t_eval = 0.0;
  std::vector<double> theta_probes;
  std::vector<std::pair<int, int>> pair_levels;           // successive level pairs
  std::vector<MeanSE> pair_distance;                      // E|x^a(t) - x^b(t)|^2
  std::vector<MeanSE> terminal_mean;                      // per level E[x(t)]
  std::vector<std::vector<MeanSE>> d_minus_one_sq;        // [level][theta] E|D-1|^2
  std::vector<MeanSE> d_energy;                           // per level E int |D|^2 dtheta
  std::vector<MeanSE> d_minus_one_energy;                 // per level E int |D-1|^2 dtheta
  std::vector<std::pair<double, double>> theta_pairs;     // probe pairs a < b
  std::vector<std::vector<MeanSE>> d_pair_diff_sq;        // [level][pair] E|D_a - D_b|^2
  std::vector<MeanSE> holder_double;                      // per level Hoelder double sum
  std::vector<std::vector<double>> log_weights;           // [level][path] Girsanov logs of E(-int u dW)
  std::vector<std::vector<std::vector<double>>> trajectories;  // optional [level][path][node]
};

/// Level lattice with mandatory common random numbers: path_sets[p] drives
/// every level at path index p. Reductions run in path order regardless of
/// the thread count, so results are bit-reproducible.
[[nodiscard]] EnsembleResult mc_ensemble(std::span<const MollifiedDrift> levels,
                                         std::span<const GaussianPathSet> path_sets,
                                         const SolverConfig& cfg, const EnsembleConfig& ecfg);

/// Streaming variant: identical output to materializing
/// sample_path_set(spec, grid, master_seed, p) for p = 0..paths-1.
[[nodiscard]] EnsembleResult mc_ensemble_seeded(std::span<const MollifiedDrift> levels,
                                                const HurstWeightSpec& spec, std::size_t paths,
                                                std::uint64_t master_seed,
                                                const SolverConfig& cfg,
                                                const EnsembleConfig& ecfg);

}  // namespace sdde
