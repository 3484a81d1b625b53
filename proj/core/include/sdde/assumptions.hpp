#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace sdde {

/// Inputs for the admissibility checks: noise scale eps in (0,1], margins
/// delta_H in (0,1] and delta_T in (0, eps^3), delay r, and per-component
/// Hurst exponents, weights, drift L1 norms, and local-non-determinism
/// constants C_j. T is an optional horizon (0 = evaluate reports at T_max).
struct AssumptionInput {
  double eps = 1.0;
  double delta_H = 0.5;
  double delta_T = 0.0;
  double r = 1.0;
  std::vector<double> H;
  std::vector<double> w;
  std::vector<double> l1;
  std::vector<double> C;
  double T = 0.0;

  [[nodiscard]] std::size_t components() const noexcept { return H.size(); }
  void validate() const;
};

/// A_j = 48 sqrt(2) (1+r) Gamma(delta_H) / sqrt(pi) * C_j^{-3/2} |w_j|^{-3} ||b_j||_L1.
[[nodiscard]] double compute_Aj(double r, double delta_H, double C_j, double w_j, double l1_j);

/// Largest ||b_j||_L1 with A_j <= 2^{-j}: the dyadic sufficient condition that
/// makes sum_j A_j <= 1 term by term.
[[nodiscard]] double l1_ceiling(std::size_t j, double r, double delta_H, double C_j, double w_j);

struct AssumptionReport {
  bool horizon_ok = false;  // eps^3 > delta_T
  double T_max = 0.0;       // (eps^3 - delta_T)^{1/delta_H}
  bool delta_T_in_paper_range = false;  // delta_T < eps^{3/delta_H} as well
  bool hurst_ok = false;                // every H_k < (1 - delta_H)/3
  double hurst_ceiling = 0.0;
  std::vector<double> A;
  double A_sum = 0.0;
  bool series_ok = false;        // sum_j A_j < 1
  double combined_T_max = 0.0;   // largest t <= T_max with eps^{-3} t^{delta_H} sum A < 1
  double T_evaluated = 0.0;      // horizon the combined check used
  bool combined_ok = false;      // eps^{-3} T_evaluated^{delta_H} sum A < 1
  std::vector<double> l1_ceilings;
  bool all_ok = false;
};

[[nodiscard]] AssumptionReport check_assumptions(const AssumptionInput& in);

/// Theoretical first-variation bounds at horizon T (in.T if set, else t).
struct BoundReport {
  double T = 0.0;     // horizon used in the exponential factor
  double beta = 0.0;  // Hoelder exponent for the integrated criteria
  double q = 0.0;     // geometric ratio eps^{-3} (t-theta)^{delta_H} sum A_j
  bool series_converges = false;
  double series_bound = 0.0;     // e^{M^2 T/2} (q/(1-q))^2; infinity when q >= 1
  double pointwise_bound = 0.0;  // e^{M^2 T/2} delta_T^{-2 delta_H} |t-theta|^{2 delta_H}
  double I1 = 0.0;  // e^{M^2 T/2} delta_T^{-2 delta_H} |theta'-theta|^{2 delta_H}
  double I2 = 0.0;  // e^{M^2 T/2} delta_T^{-2 delta_H} |t-theta'|^{2 delta_H} |theta-theta'| / (1+r)^2
  double I3 = 0.0;  // e^{M^2 T/2} delta_T^{-4 delta_H} |t-theta'|^{2 delta_H} |theta-theta'|^{2 delta_H}
  double difference_bound = 0.0;    // 3 (I1 + I2 + I3)
  double second_moment = 0.0;       // 3 eta0^2 + 3 t^2 M^2 + 3 t
  double integrated_energy = 0.0;   // int_0^t bound on E|D_theta x - 1|^2 dtheta
  double energy_total = 0.0;        // 2 t + 2 integrated_energy, bounds int E|D|^2
  double holder_double_integral = 0.0;  // int int 3(I1+I2+I3)/|th-th'|^{1+2 beta}
};

/// M is the aggregate drift bound sum_i ||b_i||_inf; eta0 the initial point
/// value. beta defaults to 0.9 * min(delta_H, 1/2).
[[nodiscard]] BoundReport malliavin_bounds(const AssumptionInput& in, double t, double theta,
                                           double theta_p, double M, double eta0 = 0.0,
                                           std::optional<double> beta = std::nullopt);

}  // namespace sdde
