#include "sdde/assumptions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sdde {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double log_beta(double x, double y) {
  return std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y);
}

}  // namespace

void AssumptionInput::validate() const {
  require(eps > 0.0 && eps <= 1.0, "AssumptionInput: eps must lie in (0, 1]");
  require(delta_H > 0.0 && delta_H <= 1.0, "AssumptionInput: delta_H must lie in (0, 1]");
  require(delta_T > 0.0, "AssumptionInput: delta_T must be positive");
  require(r > 0.0, "AssumptionInput: r must be positive");
  require(T >= 0.0, "AssumptionInput: T must be nonnegative");
  const std::size_t d = H.size();
  require(d >= 1, "AssumptionInput: at least one component required");
  require(w.size() == d && l1.size() == d && C.size() == d,
          "AssumptionInput: H, w, l1, C lengths must match");
  for (double h : H) require(h > 0.0 && h < 0.5, "AssumptionInput: H_k must lie in (0, 1/2)");
  for (double wi : w) require(wi > 0.0, "AssumptionInput: weights must be positive");
  for (double li : l1) require(li >= 0.0, "AssumptionInput: L1 norms must be nonnegative");
  for (double ci : C) require(ci > 0.0, "AssumptionInput: C_j must be positive");
}

double compute_Aj(double r, double delta_H, double C_j, double w_j, double l1_j) {
  require(r > 0.0 && delta_H > 0.0, "compute_Aj: bad r/delta_H");
  require(C_j > 0.0 && w_j != 0.0 && l1_j >= 0.0, "compute_Aj: bad C_j/w_j/l1_j");
  return 48.0 * std::sqrt(2.0) * (1.0 + r) * std::tgamma(delta_H) / std::sqrt(M_PI) *
         std::pow(C_j, -1.5) * std::pow(std::abs(w_j), -3.0) * l1_j;
}

double l1_ceiling(std::size_t j, double r, double delta_H, double C_j, double w_j) {
  require(j >= 1, "l1_ceiling: component index starts at 1");
  require(r > 0.0 && delta_H > 0.0, "l1_ceiling: bad r/delta_H");
  require(C_j > 0.0 && w_j > 0.0, "l1_ceiling: bad C_j/w_j");
  return std::sqrt(M_PI) * std::pow(2.0, -static_cast<double>(j)) * std::pow(C_j, 1.5) *
         std::pow(w_j, 3.0) / (48.0 * std::sqrt(2.0) * (1.0 + r) * std::tgamma(delta_H));
}

AssumptionReport check_assumptions(const AssumptionInput& in) {
  in.validate();
  AssumptionReport rep;

  const double eps3 = in.eps * in.eps * in.eps;
  rep.horizon_ok = eps3 > in.delta_T;
  rep.T_max = rep.horizon_ok ? std::pow(eps3 - in.delta_T, 1.0 / in.delta_H) : 0.0;
  rep.delta_T_in_paper_range = in.delta_T < std::pow(in.eps, 3.0 / in.delta_H);

  rep.hurst_ceiling = (1.0 - in.delta_H) / 3.0;
  rep.hurst_ok = true;
  for (double h : in.H) rep.hurst_ok = rep.hurst_ok && h < rep.hurst_ceiling;

  rep.A.resize(in.components());
  rep.l1_ceilings.resize(in.components());
  rep.A_sum = 0.0;
  for (std::size_t k = 0; k < in.components(); ++k) {
    rep.A[k] = compute_Aj(in.r, in.delta_H, in.C[k], in.w[k], in.l1[k]);
    rep.A_sum += rep.A[k];
    rep.l1_ceilings[k] = l1_ceiling(k + 1, in.r, in.delta_H, in.C[k], in.w[k]);
  }
  rep.series_ok = rep.A_sum < 1.0;

  if (rep.A_sum > 0.0) {
    const double t_star = std::pow(eps3 / rep.A_sum, 1.0 / in.delta_H);
    rep.combined_T_max = std::min(rep.T_max, t_star);
  } else {
    rep.combined_T_max = rep.T_max;
  }

  rep.T_evaluated = in.T > 0.0 ? in.T : rep.T_max;
  const double ratio =
      std::pow(rep.T_evaluated, in.delta_H) * rep.A_sum / eps3;
  rep.combined_ok = rep.horizon_ok && rep.T_evaluated <= rep.T_max && ratio < 1.0;

  rep.all_ok = rep.horizon_ok && rep.hurst_ok && rep.series_ok && rep.combined_ok;
  return rep;
}

BoundReport malliavin_bounds(const AssumptionInput& in, double t, double theta, double theta_p,
                             double M, double eta0, std::optional<double> beta) {
  in.validate();
  require(t > 0.0, "malliavin_bounds: t must be positive");
  require(theta >= 0.0 && theta <= t, "malliavin_bounds: theta must lie in [0, t]");
  require(theta_p >= 0.0 && theta_p <= t, "malliavin_bounds: theta' must lie in [0, t]");
  require(M >= 0.0, "malliavin_bounds: M must be nonnegative");

  BoundReport rep;
  rep.T = in.T > 0.0 ? in.T : t;
  const double beta_cap = std::min(in.delta_H, 0.5);
  rep.beta = beta.value_or(0.9 * beta_cap);
  require(rep.beta > 0.0 && rep.beta < beta_cap,
          "malliavin_bounds: beta must lie in (0, min(delta_H, 1/2))");

  double A_sum = 0.0;
  for (std::size_t k = 0; k < in.components(); ++k)
    A_sum += compute_Aj(in.r, in.delta_H, in.C[k], in.w[k], in.l1[k]);

  const double eps3 = in.eps * in.eps * in.eps;
  const double kappa = std::exp(0.5 * M * M * rep.T);
  const double a = 2.0 * in.delta_H;

  rep.q = std::pow(t - theta, in.delta_H) * A_sum / eps3;
  rep.series_converges = rep.q < 1.0;
  if (rep.series_converges) {
    const double g = rep.q / (1.0 - rep.q);
    rep.series_bound = kappa * g * g;
  } else {
    rep.series_bound = std::numeric_limits<double>::infinity();
  }

  const double dtm2 = std::pow(in.delta_T, -a);
  const double dtm4 = std::pow(in.delta_T, -2.0 * a);
  rep.pointwise_bound = kappa * dtm2 * std::pow(t - theta, a);

  const double dth = std::abs(theta_p - theta);
  const double dtp = std::abs(t - theta_p);
  rep.I1 = kappa * dtm2 * std::pow(dth, a);
  rep.I2 = kappa * dtm2 * std::pow(dtp, a) * dth / ((1.0 + in.r) * (1.0 + in.r));
  rep.I3 = kappa * dtm4 * std::pow(dtp, a) * std::pow(dth, a);
  rep.difference_bound = 3.0 * (rep.I1 + rep.I2 + rep.I3);

  rep.second_moment = 3.0 * eta0 * eta0 + 3.0 * t * t * M * M + 3.0 * t;
  rep.integrated_energy = kappa * dtm2 * std::pow(t, a + 1.0) / (a + 1.0);
  rep.energy_total = 2.0 * t + 2.0 * rep.integrated_energy;

  // Double integral of 3(I1+I2+I3)/|th-th'|^{1+2 beta} over [0,T]^2 with the
  // outer time frozen at T; closed forms via Beta functions.
  const double b2 = 2.0 * rep.beta;
  const double T = rep.T;
  const double J1 = 2.0 * std::pow(T, a + 1.0 - b2) / ((a - b2) * (a + 1.0 - b2));
  const double J2 = 2.0 * std::exp(log_beta(a + 1.0, 2.0 - b2)) *
                    std::pow(T, a + 2.0 - b2) / (1.0 - b2);
  const double J3 = 2.0 * std::exp(log_beta(a + 1.0, a - b2 + 1.0)) *
                    std::pow(T, 2.0 * a + 1.0 - b2) / (a - b2);
  rep.holder_double_integral =
      3.0 * kappa * (dtm2 * J1 + dtm2 * J2 / ((1.0 + in.r) * (1.0 + in.r)) + dtm4 * J3);
  return rep;
}

}  // namespace sdde
