#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sdde/drift.hpp"
#include "sdde/noise.hpp"
#include "sdde/solver.hpp"

namespace sdde {

/// log E(int u dW)_t = sum_k u_k dW_k - (1/2) sum_k u_k^2 dt (left-point sums);
/// kept in the log domain until reduction.
struct RNWeight {
  double log_value = 0.0;
  double ito_sum = 0.0;   // sum u dW
  double quad_sum = 0.0;  // sum u^2 dt

  [[nodiscard]] double value() const;
};

/// u has one value per step (left points); W has steps+1 grid values.
[[nodiscard]] RNWeight doleans_exp(std::span<const double> u, std::span<const double> W,
                                   double dt);

/// e^{|alpha| T sum_i ||b_i||_inf^2}: explicit Novikov majorant.
[[nodiscard]] double novikov_bound(const DriftSpec& spec, double T, double alpha);

/// Payoff of the path's grid values with a declared finite sup bound;
/// an infinite declared bound is rejected by girsanov_identity_check.
struct GridPayoff {
  std::string label;
  double sup_bound = 0.0;
  std::function<double(std::span<const double> path, double dt)> f;
};

/// clamp(path(T), +-bound): square-integrable stand-in for the terminal value.
[[nodiscard]] GridPayoff payoff_terminal(double bound = 1e6);
[[nodiscard]] GridPayoff payoff_const_one();
[[nodiscard]] GridPayoff payoff_cos_terminal();

struct PayoffCheck {
  std::string label;
  MeanSE base;        // E[f(W)]
  MeanSE reweighted;  // E[f(W + int u ds) exp(log RN)]
  MeanSE diff;        // pathwise difference estimator
  bool pass_3se = false;
};

struct GirsanovReport {
  std::vector<PayoffCheck> payoffs;
  MeanSE weight_mean;  // E[exp(log RN)], should be 1
  double novikov = 0.0;
  std::size_t paths = 0;
};

/// For each payoff f: compare E[f(Wbar) exp(log RN)] with E[f(W)], where
/// u(s) = b^n(<x_s, e_i> + eps w_i B_i(s)) along the Euler solution,
/// Wbar = W + int u ds and RN = E(-int u dW). Exact in distribution for the
/// discretized Gaussian increments, so differences are pure Monte Carlo noise.
[[nodiscard]] GirsanovReport girsanov_identity_check(const MollifiedDrift& drift,
                                                     const SolverConfig& cfg,
                                                     const HurstWeightSpec& spec,
                                                     std::span<const GridPayoff> payoffs,
                                                     std::size_t paths,
                                                     std::uint64_t master_seed);

/// Step function: value values[i] on [times[i], times[i+1]), last value
/// extends to the end of the horizon.
struct StepFunction {
  std::vector<double> times;   // ascending, times[0] = 0
  std::vector<double> values;  // same length

  [[nodiscard]] double operator()(double s) const;
  void validate() const;
};

/// Transform probe: X is paired with exp(int_0^t phi dW + sum_i sum_j
/// alpha_{i,j} w_i (B_i(t_{i,j}) - B_i(t_{i,j-1}))), t_{i,0} = 0 implied.
struct WienerTestFunction {
  double t = 0.0;
  StepFunction phi;
  struct AlphaComponent {
    std::vector<double> times;   // ascending, grid-aligned, t_{i,j} <= t
    std::vector<double> values;  // alpha_{i,j} per increment
  };
  std::vector<AlphaComponent> alpha;

  void validate() const;
};

/// Monte Carlo estimate of E[X exp(...)] over parallel arrays of X values and
/// their driving path sets.
[[nodiscard]] MeanSE wiener_transform(std::span<const double> X,
                                      std::span<const GaussianPathSet> paths,
                                      const WienerTestFunction& test);

/// Probe dictionary: constants and +-1 steps with dyadic breakpoints.
[[nodiscard]] std::vector<WienerTestFunction> wiener_probe_dictionary(double t,
                                                                      std::size_t dyadic_depth);

/// x~(t) = eta(0) + W(t); W~(t) = W(t) - int_0^t b(x~_s + eps B(s)) ds by
/// left-point quadrature; RN = log E(int u dW). The reconstruction identity
/// x~ = eta(0) + int b ds + W~ holds by construction up to rounding.
struct WeakSolution {
  std::vector<double> x_tilde;
  std::vector<double> W_tilde;
  std::vector<double> u;  // drift values at left points
  RNWeight rn;
  double reconstruction_residual = 0.0;
};

[[nodiscard]] WeakSolution weak_solution_construct(const MollifiedDrift& drift,
                                                   const GaussianPathSet& noise,
                                                   const SolverConfig& cfg);
[[nodiscard]] WeakSolution weak_solution_construct(const DriftSpec& drift,
                                                   const GaussianPathSet& noise,
                                                   const SolverConfig& cfg);

}  // namespace sdde
