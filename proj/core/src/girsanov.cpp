#include "sdde/girsanov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdde {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::size_t grid_index(double t, double dt, const char* what) {
  const double q = t / dt;
  const double k = std::round(q);
  if (!(std::abs(q - k) <= 1e-9 * std::max(1.0, std::abs(q)) && k >= 0.0))
    throw std::invalid_argument(what);
  return static_cast<std::size_t>(k);
}

MeanSE reduce_mean_se(const std::vector<double>& v) {
  MeanSE out;
  out.n = v.size();
  if (v.empty()) return out;
  double s = 0.0;
  for (double x : v) s += x;
  out.mean = s / static_cast<double>(v.size());
  if (v.size() >= 2) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / (static_cast<double>(v.size()) * static_cast<double>(v.size() - 1)));
  }
  return out;
}

/// Shared weak-solution sweep; eval(i, z) evaluates the i-th component.
template <typename Eval>
WeakSolution weak_solution_sweep(std::size_t d, const Eval& eval, const GaussianPathSet& noise,
                                 const SolverConfig& cfg) {
  cfg.validate();
  require(d == cfg.d, "weak_solution_construct: drift dimension mismatch");
  const std::size_t steps = cfg.steps();
  require(noise.grid.size() >= steps + 1, "weak_solution_construct: noise grid too short");
  require(std::abs(noise.dt() - cfg.dt) <= 1e-9 * cfg.dt,
          "weak_solution_construct: noise grid spacing mismatch");
  require(noise.B.size() >= d && noise.w.size() >= d,
          "weak_solution_construct: not enough noise components");

  WeakSolution out;
  out.x_tilde.resize(steps + 1);
  out.W_tilde.resize(steps + 1);
  out.u.resize(steps);

  const double eta0 = cfg.eta.point;
  for (std::size_t k = 0; k <= steps; ++k) out.x_tilde[k] = eta0 + noise.W[k];

  double cum = 0.0;  // left-point integral of u over [0, t_k]
  out.W_tilde[0] = noise.W[0];
  for (std::size_t k = 0; k < steps; ++k) {
    const double t_k = static_cast<double>(k) * cfg.dt;
    const M2Element seg = segment_extract(
        std::span<const double>(out.x_tilde.data(), k + 1), cfg.dt, t_k, cfg.eta);
    double b_val = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double coeff = m2_inner(seg, cfg.basis.e(i + 1));
      b_val += eval(i, coeff + cfg.eps * noise.w[i] * noise.B[i][k]);
    }
    out.u[k] = b_val;
    cum += b_val * cfg.dt;
    out.W_tilde[k + 1] = noise.W[k + 1] - cum;
  }

  out.rn = doleans_exp(out.u, std::span<const double>(noise.W.data(), steps + 1), cfg.dt);

  double resid = 0.0;
  double cum2 = 0.0;
  for (std::size_t k = 0; k <= steps; ++k) {
    if (k > 0) cum2 += out.u[k - 1] * cfg.dt;
    resid = std::max(resid, std::abs(out.x_tilde[k] - eta0 - cum2 - out.W_tilde[k]));
  }
  out.reconstruction_residual = resid;
  return out;
}

}  // namespace

double RNWeight::value() const { return std::exp(log_value); }

RNWeight doleans_exp(std::span<const double> u, std::span<const double> W, double dt) {
  require(dt > 0.0, "doleans_exp: dt must be positive");
  require(W.size() == u.size() + 1, "doleans_exp: W must have one more node than u");
  RNWeight out;
  for (std::size_t k = 0; k < u.size(); ++k) {
    out.ito_sum += u[k] * (W[k + 1] - W[k]);
    out.quad_sum += u[k] * u[k] * dt;
  }
  out.log_value = out.ito_sum - 0.5 * out.quad_sum;
  return out;
}

double novikov_bound(const DriftSpec& spec, double T, double alpha) {
  spec.validate();
  require(T > 0.0, "novikov_bound: T must be positive");
  return std::exp(std::abs(alpha) * T * spec.sup_norm_sq_sum());
}

GridPayoff payoff_terminal(double bound) {
  require(bound > 0.0 && std::isfinite(bound), "payoff_terminal: bound must be finite");
  GridPayoff p;
  p.label = "terminal_clamped";
  p.sup_bound = bound;
  p.f = [bound](std::span<const double> path, double) {
    return std::clamp(path.back(), -bound, bound);
  };
  return p;
}

GridPayoff payoff_const_one() {
  GridPayoff p;
  p.label = "const_one";
  p.sup_bound = 1.0;
  p.f = [](std::span<const double>, double) { return 1.0; };
  return p;
}

GridPayoff payoff_cos_terminal() {
  GridPayoff p;
  p.label = "cos_terminal";
  p.sup_bound = 1.0;
  p.f = [](std::span<const double> path, double) { return std::cos(path.back()); };
  return p;
}

GirsanovReport girsanov_identity_check(const MollifiedDrift& drift, const SolverConfig& cfg,
                                       const HurstWeightSpec& spec,
                                       std::span<const GridPayoff> payoffs, std::size_t paths,
                                       std::uint64_t master_seed) {
  cfg.validate();
  spec.validate();
  require(paths >= 2, "girsanov_identity_check: need at least 2 paths");
  for (const auto& p : payoffs) {
    require(static_cast<bool>(p.f), "girsanov_identity_check: payoff missing function");
    require(std::isfinite(p.sup_bound) && p.sup_bound >= 0.0,
            "girsanov_identity_check: payoffs must declare a finite sup bound");
  }

  const std::size_t steps = cfg.steps();
  const std::vector<double> grid = make_uniform_grid(cfg.T, steps);
  std::vector<FbmSampler> samplers;
  samplers.reserve(spec.components());
  for (std::size_t n = 0; n < spec.components(); ++n) samplers.emplace_back(spec.H[n], grid);

  const std::size_t nf = payoffs.size();
  std::vector<std::vector<double>> base(nf, std::vector<double>(paths));
  std::vector<std::vector<double>> rew(nf, std::vector<double>(paths));
  std::vector<std::vector<double>> diff(nf, std::vector<double>(paths));
  std::vector<double> weights(paths);

  std::vector<double> neg_u(steps), Wbar(steps + 1);
  for (std::size_t p = 0; p < paths; ++p) {
    const GaussianPathSet ps = sample_path_set_with(spec, samplers, grid, master_seed, p);
    const TrajectoryResult traj = euler_solve(drift, ps, cfg);

    for (std::size_t k = 0; k < steps; ++k) neg_u[k] = -traj.drift_path[k];
    const RNWeight rn =
        doleans_exp(neg_u, std::span<const double>(ps.W.data(), steps + 1), cfg.dt);
    const double weight = rn.value();
    if (!(weight > 0.0) || !std::isfinite(weight))
      throw std::logic_error("girsanov_identity_check: nonpositive density weight");
    weights[p] = weight;

    Wbar[0] = ps.W[0];
    double cum = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      cum += traj.drift_path[k] * cfg.dt;
      Wbar[k + 1] = ps.W[k + 1] + cum;
    }

    for (std::size_t q = 0; q < nf; ++q) {
      const double fb = payoffs[q].f(std::span<const double>(ps.W.data(), steps + 1), cfg.dt);
      const double fr = payoffs[q].f(Wbar, cfg.dt);
      base[q][p] = fb;
      rew[q][p] = fr * weight;
      diff[q][p] = fr * weight - fb;
    }
  }

  GirsanovReport rep;
  rep.paths = paths;
  rep.weight_mean = reduce_mean_se(weights);
  double sup_sq = 0.0;
  for (const auto& c : drift.comps) sup_sq += c.sup_norm * c.sup_norm;
  rep.novikov = std::exp(cfg.T * sup_sq);
  for (std::size_t q = 0; q < nf; ++q) {
    PayoffCheck chk;
    chk.label = payoffs[q].label;
    chk.base = reduce_mean_se(base[q]);
    chk.reweighted = reduce_mean_se(rew[q]);
    chk.diff = reduce_mean_se(diff[q]);
    chk.pass_3se = std::abs(chk.diff.mean) <= 3.0 * chk.diff.se + 1e-15;
    rep.payoffs.push_back(std::move(chk));
  }
  return rep;
}

double StepFunction::operator()(double s) const {
  std::size_t i = 0;
  while (i + 1 < times.size() && s >= times[i + 1]) ++i;
  return values[i];
}

void StepFunction::validate() const {
  require(!times.empty() && times.size() == values.size(),
          "StepFunction: times/values must match and be nonempty");
  require(times[0] == 0.0, "StepFunction: first breakpoint must be 0");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    require(times[i] < times[i + 1], "StepFunction: breakpoints must ascend");
}

void WienerTestFunction::validate() const {
  require(t > 0.0, "WienerTestFunction: t must be positive");
  phi.validate();
  for (double bp : phi.times) require(bp < t, "WienerTestFunction: phi breakpoints must precede t");
  for (const auto& comp : alpha) {
    require(comp.times.size() == comp.values.size(),
            "WienerTestFunction: alpha times/values must match");
    double prev = 0.0;
    for (double tj : comp.times) {
      require(tj > prev && tj <= t, "WienerTestFunction: alpha times must ascend within (0, t]");
      prev = tj;
    }
  }
}

MeanSE wiener_transform(std::span<const double> X, std::span<const GaussianPathSet> paths,
                        const WienerTestFunction& test) {
  test.validate();
  require(X.size() == paths.size() && !X.empty(),
          "wiener_transform: X and path sets must be parallel and nonempty");

  const double dt = paths[0].dt();
  const std::size_t k_t = grid_index(test.t, dt, "wiener_transform: t must be grid-aligned");

  std::vector<double> vals(X.size());
  for (std::size_t p = 0; p < X.size(); ++p) {
    const GaussianPathSet& ps = paths[p];
    require(ps.W.size() >= k_t + 1, "wiener_transform: path shorter than t");
    require(std::abs(ps.dt() - dt) <= 1e-9 * dt, "wiener_transform: mixed grid spacings");
    require(test.alpha.size() <= ps.B.size(),
            "wiener_transform: more alpha components than noise components");

    double expo = 0.0;
    for (std::size_t k = 0; k < k_t; ++k) {
      const double t_k = static_cast<double>(k) * dt;
      expo += test.phi(t_k) * (ps.W[k + 1] - ps.W[k]);
    }
    for (std::size_t i = 0; i < test.alpha.size(); ++i) {
      const auto& comp = test.alpha[i];
      std::size_t prev = 0;
      for (std::size_t j = 0; j < comp.times.size(); ++j) {
        const std::size_t kj =
            grid_index(comp.times[j], dt, "wiener_transform: alpha time must be grid-aligned");
        expo += comp.values[j] * ps.w[i] * (ps.B[i][kj] - ps.B[i][prev]);
        prev = kj;
      }
    }
    vals[p] = X[p] * std::exp(expo);
  }
  return reduce_mean_se(vals);
}

std::vector<WienerTestFunction> wiener_probe_dictionary(double t, std::size_t dyadic_depth) {
  require(t > 0.0, "wiener_probe_dictionary: t must be positive");
  std::vector<WienerTestFunction> out;

  auto constant = [t](double c) {
    WienerTestFunction f;
    f.t = t;
    f.phi.times = {0.0};
    f.phi.values = {c};
    return f;
  };
  out.push_back(constant(0.0));
  out.push_back(constant(1.0));
  out.push_back(constant(-1.0));

  for (std::size_t lvl = 1; lvl <= dyadic_depth; ++lvl) {
    const std::size_t cells = static_cast<std::size_t>(1) << lvl;
    for (int polarity : {+1, -1}) {
      WienerTestFunction f;
      f.t = t;
      f.phi.times.resize(cells);
      f.phi.values.resize(cells);
      for (std::size_t c = 0; c < cells; ++c) {
        f.phi.times[c] = t * static_cast<double>(c) / static_cast<double>(cells);
        f.phi.values[c] = (c % 2 == 0) ? polarity : -polarity;
      }
      out.push_back(std::move(f));
    }
  }
  return out;
}

WeakSolution weak_solution_construct(const MollifiedDrift& drift, const GaussianPathSet& noise,
                                     const SolverConfig& cfg) {
  return weak_solution_sweep(
      drift.dimension(), [&](std::size_t i, double z) { return drift.comps[i].eval(z); }, noise,
      cfg);
}

WeakSolution weak_solution_construct(const DriftSpec& drift, const GaussianPathSet& noise,
                                     const SolverConfig& cfg) {
  drift.validate();
  return weak_solution_sweep(
      drift.dimension(), [&](std::size_t i, double z) { return drift.comps[i].f(z); }, noise,
      cfg);
}

}  // namespace sdde
