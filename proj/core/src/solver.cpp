#include "sdde/solver.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace sdde {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::size_t integral_ratio(double num, double den, const char* what) {
  const double q = num / den;
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

/// Trapezoid weights for an ascending, possibly non-uniform probe grid.
std::vector<double> probe_weights(std::span<const double> probes) {
  const std::size_t n = probes.size();
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;
  w[0] = 0.5 * (probes[1] - probes[0]);
  w[n - 1] = 0.5 * (probes[n - 1] - probes[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) w[i] = 0.5 * (probes[i + 1] - probes[i - 1]);
  return w;
}

struct PathSlot {
  std::vector<double> terminal;             // per level
  std::vector<std::vector<double>> d_vals;  // [level][probe]
  std::vector<double> log_weight;           // per level
  std::vector<std::vector<double>> traj;    // per level, when stored
};

}  // namespace

std::size_t SolverConfig::steps() const { return integral_ratio(T, dt, "SolverConfig: T/dt"); }

std::size_t SolverConfig::window() const { return integral_ratio(r, dt, "SolverConfig: r/dt"); }

void SolverConfig::validate() const {
  require(dt > 0.0 && T > 0.0 && r > 0.0, "SolverConfig: T, dt, r must be positive");
  require(eps > 0.0 && eps <= 1.0, "SolverConfig: eps must lie in (0, 1]");
  const std::size_t n_steps = integral_ratio(T, dt, "SolverConfig: T must be a multiple of dt");
  const std::size_t K = integral_ratio(r, dt, "SolverConfig: r must be a multiple of dt");
  require(n_steps >= 1 && K >= 2, "SolverConfig: need T >= dt and r >= 2 dt");
  eta.validate();
  require(std::abs(eta.r - r) <= 1e-12 * std::max(1.0, r), "SolverConfig: eta delay mismatch");
  require(eta.cells() == K, "SolverConfig: eta grid spacing must equal dt");
  require(d >= 1, "SolverConfig: d must be >= 1");
  require(basis.count() >= d, "SolverConfig: basis too small for d");
  require(std::abs(basis.r - r) <= 1e-12 * std::max(1.0, r), "SolverConfig: basis delay mismatch");
  require(level >= 0, "SolverConfig: level must be nonnegative");
}

TrajectoryResult euler_solve(const MollifiedDrift& drift, const GaussianPathSet& noise,
                             const SolverConfig& cfg) {
  cfg.validate();
  require(drift.dimension() == cfg.d, "euler_solve: drift dimension mismatch");
  require(drift.level >= 1, "euler_solve: drift must be mollified");
  if (cfg.level != 0)
    require(drift.level == cfg.level, "euler_solve: mollification level mismatch");

  const std::size_t steps = cfg.steps();
  require(noise.grid.size() >= steps + 1, "euler_solve: noise grid shorter than horizon");
  require(std::abs(noise.dt() - cfg.dt) <= 1e-9 * cfg.dt, "euler_solve: noise grid spacing mismatch");
  require(noise.W.size() == noise.grid.size(), "euler_solve: Brownian path length mismatch");
  require(noise.B.size() >= cfg.d && noise.w.size() >= cfg.d,
          "euler_solve: not enough noise components for d");
  for (std::size_t i = 0; i < cfg.d; ++i)
    require(noise.B[i].size() == noise.grid.size(), "euler_solve: component path length mismatch");

  TrajectoryResult out;
  out.sup_bound = drift.sup_norm_sum();
  out.x.resize(steps + 1);
  out.coeffs.assign(steps, std::vector<double>(cfg.d, 0.0));
  out.drift_path.resize(steps);
  out.dW.resize(steps);
  out.x[0] = cfg.eta.point;

  const double eta0 = cfg.eta.point;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t_k = static_cast<double>(k) * cfg.dt;
    const M2Element seg =
        segment_extract(std::span<const double>(out.x.data(), k + 1), cfg.dt, t_k, cfg.eta);
    double b_val = 0.0;
    for (std::size_t i = 0; i < cfg.d; ++i) {
      const double coeff = m2_inner(seg, cfg.basis.e(i + 1));
      out.coeffs[k][i] = coeff;
      b_val += drift.comps[i].eval(coeff + cfg.eps * noise.w[i] * noise.B[i][k]);
    }
    out.drift_path[k] = b_val;
    out.dW[k] = noise.W[k + 1] - noise.W[k];
    out.x[k + 1] = out.x[k] + b_val * cfg.dt + out.dW[k];

    const double dev = std::abs(out.x[k + 1] - eta0 - noise.W[k + 1]);
    const double cap =
        (static_cast<double>(k + 1) * cfg.dt) * out.sup_bound * (1.0 + 1e-10) + 1e-12;
    if (dev > cap) throw std::logic_error("euler_solve: bounded-drift envelope violated");
  }
  return out;
}

FirstVariationResult malliavin_profile(const MollifiedDrift& drift, const TrajectoryResult& traj,
                                       const GaussianPathSet& noise, const SolverConfig& cfg,
                                       std::span<const double> thetas, double t) {
  cfg.validate();
  require(drift.dimension() == cfg.d, "malliavin_profile: drift dimension mismatch");
  const std::size_t steps = cfg.steps();
  require(traj.coeffs.size() == steps && traj.x.size() == steps + 1,
          "malliavin_profile: trajectory does not match the configuration");
  const std::size_t k_t = integral_ratio(t, cfg.dt, "malliavin_profile: t must be grid-aligned");
  require(k_t <= steps, "malliavin_profile: t beyond the simulated horizon");
  const std::size_t K = cfg.window();

  double lip_sum = 0.0;
  for (const auto& c : drift.comps) lip_sum += c.lipschitz;
  const double rate = lip_sum * std::sqrt(1.0 + cfg.r);

  // Components whose history part vanishes identically skip the u-integral.
  std::vector<char> has_hist(cfg.d, 0);
  for (std::size_t i = 0; i < cfg.d; ++i)
    for (double h : cfg.basis.e(i + 1).hist)
      if (h != 0.0) {
        has_hist[i] = 1;
        break;
      }

  FirstVariationResult out;
  out.t = t;
  out.thetas.assign(thetas.begin(), thetas.end());
  out.values.resize(thetas.size(), 0.0);
  out.D.resize(thetas.size());
  out.gronwall_bound.resize(thetas.size(), 1.0);

  for (std::size_t q = 0; q < thetas.size(); ++q) {
    const double theta = thetas[q];
    require(theta >= 0.0, "malliavin_profile: theta must be nonnegative");
    if (theta > t) continue;  // bump after evaluation time: derivative is 0
    const std::size_t k_theta =
        integral_ratio(theta, cfg.dt, "malliavin_profile: theta must be grid-aligned");

    std::vector<double>& D = out.D[q];
    D.assign(k_t - k_theta + 1, 0.0);
    D[0] = 1.0;
    for (std::size_t k = k_theta; k < k_t; ++k) {
      const double Ds = D[k - k_theta];
      double incr = 0.0;
      for (std::size_t i = 0; i < cfg.d; ++i) {
        const double arg = traj.coeffs[k][i] + cfg.eps * noise.w[i] * noise.B[i][k];
        const double slope = drift.comps[i].eval_deriv(arg);
        if (slope == 0.0) continue;
        const M2Element& ei = cfg.basis.e(i + 1);
        double dcoeff = Ds * ei.point;
        if (has_hist[i]) {
          double acc = 0.0;
          for (std::size_t m = 0; m <= K; ++m) {
            // s + u lands on grid node k - K + m; bumps before theta vanish.
            if (k + m < K + k_theta) continue;
            const std::size_t idx = k + m - K;
            if (idx > k) break;
            const double wgt = (m == 0 || m == K) ? 0.5 : 1.0;
            acc += wgt * D[idx - k_theta] * ei.hist[m];
          }
          dcoeff += acc * cfg.dt;
        }
        incr += slope * dcoeff;
      }
      D[k + 1 - k_theta] = Ds + incr * cfg.dt;
    }
    out.values[q] = D.back();
    out.gronwall_bound[q] = std::exp(rate * (t - theta));
  }
  return out;
}

double malliavin_solve(const MollifiedDrift& drift, const TrajectoryResult& traj,
                       const GaussianPathSet& noise, const SolverConfig& cfg, double theta,
                       double t) {
  const double th[1] = {theta};
  return malliavin_profile(drift, traj, noise, cfg, th, t).values[0];
}

void EnsembleConfig::validate() const {
  require(theta_probes.size() <= 32, "EnsembleConfig: at most 32 theta probes");
  for (std::size_t i = 0; i + 1 < theta_probes.size(); ++i)
    require(theta_probes[i] < theta_probes[i + 1], "EnsembleConfig: probes must ascend");
  for (double th : theta_probes)
    require(th >= 0.0, "EnsembleConfig: probes must be nonnegative");
  require(t_eval >= 0.0, "EnsembleConfig: t_eval must be nonnegative");
}

namespace {

EnsembleResult mc_ensemble_impl(std::span<const MollifiedDrift> levels,
                                const std::function<GaussianPathSet(std::size_t)>& get_path,
                                std::size_t paths, const SolverConfig& cfg,
                                const EnsembleConfig& ecfg) {
  cfg.validate();
  ecfg.validate();
  require(!levels.empty(), "mc_ensemble: no drift levels");
  require(paths >= 1, "mc_ensemble: no paths");

  const std::size_t L = levels.size();
  const double t_eval = ecfg.t_eval > 0.0 ? ecfg.t_eval : cfg.T;
  const std::size_t k_eval =
      integral_ratio(t_eval, cfg.dt, "mc_ensemble: t_eval must be grid-aligned");
  require(k_eval <= cfg.steps(), "mc_ensemble: t_eval beyond horizon");
  for (double th : ecfg.theta_probes)
    require(th <= t_eval, "mc_ensemble: probes must not exceed t_eval");

  EnsembleResult res;
  res.t_eval = t_eval;
  res.theta_probes = ecfg.theta_probes;
  for (const auto& lv : levels) res.levels.push_back(lv.level);
  for (std::size_t l = 0; l + 1 < L; ++l)
    res.pair_levels.emplace_back(levels[l].level, levels[l + 1].level);
  const std::size_t P = ecfg.theta_probes.size();
  for (std::size_t i = 0; i + 1 < P; ++i)
    res.theta_pairs.emplace_back(ecfg.theta_probes[i], ecfg.theta_probes[i + 1]);

  std::vector<PathSlot> slots(paths);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto work = [&] {
    try {
      for (;;) {
        const std::size_t p = next.fetch_add(1);
        if (p >= paths) return;
        const GaussianPathSet ps = get_path(p);
        PathSlot& slot = slots[p];
        slot.terminal.resize(L);
        slot.d_vals.resize(L);
        slot.log_weight.resize(L);
        if (ecfg.store_trajectories) slot.traj.resize(L);
        for (std::size_t l = 0; l < L; ++l) {
          const TrajectoryResult traj = euler_solve(levels[l], ps, cfg);
          slot.terminal[l] = traj.x[k_eval];
          double lw = 0.0;
          for (std::size_t k = 0; k < traj.drift_path.size(); ++k)
            lw += -traj.drift_path[k] * traj.dW[k] -
                  0.5 * traj.drift_path[k] * traj.drift_path[k] * cfg.dt;
          slot.log_weight[l] = lw;
          if (P > 0) {
            const FirstVariationResult fv =
                malliavin_profile(levels[l], traj, ps, cfg, ecfg.theta_probes, t_eval);
            slot.d_vals[l] = fv.values;
          }
          if (ecfg.store_trajectories) slot.traj[l] = traj.x;
        }
      }
    } catch (...) {
      std::scoped_lock lk(error_mu);
      if (!first_error) first_error = std::current_exception();
      next.store(paths);
    }
  };

  std::size_t n_threads = ecfg.threads ? ecfg.threads : std::thread::hardware_concurrency();
  if (n_threads == 0) n_threads = 1;
  n_threads = std::min(n_threads, paths);
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Reductions run serially in path order: output is thread-count independent.
  const std::vector<double> wq = probe_weights(ecfg.theta_probes);
  std::vector<double> scratch(paths);

  res.terminal_mean.resize(L);
  res.pair_distance.resize(L >= 1 ? L - 1 : 0);
  res.d_minus_one_sq.assign(L, std::vector<MeanSE>(P));
  res.d_energy.resize(L);
  res.d_minus_one_energy.resize(L);
  res.d_pair_diff_sq.assign(L, std::vector<MeanSE>(P >= 1 ? P - 1 : 0));
  res.holder_double.resize(L);
  res.log_weights.assign(L, std::vector<double>(paths, 0.0));
  if (ecfg.store_trajectories) res.trajectories.resize(L);

  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t p = 0; p < paths; ++p) scratch[p] = slots[p].terminal[l];
    res.terminal_mean[l] = reduce_mean_se(scratch);

    for (std::size_t p = 0; p < paths; ++p) res.log_weights[l][p] = slots[p].log_weight[l];

    if (l + 1 < L) {
      for (std::size_t p = 0; p < paths; ++p) {
        const double d = slots[p].terminal[l] - slots[p].terminal[l + 1];
        scratch[p] = d * d;
      }
      res.pair_distance[l] = reduce_mean_se(scratch);
    }

    for (std::size_t q = 0; q < P; ++q) {
      for (std::size_t p = 0; p < paths; ++p) {
        const double d = slots[p].d_vals[l][q] - 1.0;
        scratch[p] = d * d;
      }
      res.d_minus_one_sq[l][q] = reduce_mean_se(scratch);
    }

    if (P >= 2) {
      for (std::size_t p = 0; p < paths; ++p) {
        double acc = 0.0;
        for (std::size_t q = 0; q < P; ++q)
          acc += wq[q] * slots[p].d_vals[l][q] * slots[p].d_vals[l][q];
        scratch[p] = acc;
      }
      res.d_energy[l] = reduce_mean_se(scratch);

      for (std::size_t p = 0; p < paths; ++p) {
        double acc = 0.0;
        for (std::size_t q = 0; q < P; ++q) {
          const double d = slots[p].d_vals[l][q] - 1.0;
          acc += wq[q] * d * d;
        }
        scratch[p] = acc;
      }
      res.d_minus_one_energy[l] = reduce_mean_se(scratch);
    }

    for (std::size_t q = 0; q + 1 < P; ++q) {
      for (std::size_t p = 0; p < paths; ++p) {
        const double d = slots[p].d_vals[l][q] - slots[p].d_vals[l][q + 1];
        scratch[p] = d * d;
      }
      res.d_pair_diff_sq[l][q] = reduce_mean_se(scratch);
    }

    if (ecfg.beta > 0.0 && P >= 2) {
      const double expo = 1.0 + 2.0 * ecfg.beta;
      for (std::size_t p = 0; p < paths; ++p) {
        double acc = 0.0;
        for (std::size_t i = 0; i < P; ++i)
          for (std::size_t j = i + 1; j < P; ++j) {
            const double d = slots[p].d_vals[l][i] - slots[p].d_vals[l][j];
            const double gap = ecfg.theta_probes[j] - ecfg.theta_probes[i];
            acc += 2.0 * wq[i] * wq[j] * d * d / std::pow(gap, expo);
          }
        scratch[p] = acc;
      }
      res.holder_double[l] = reduce_mean_se(scratch);
    }

    if (ecfg.store_trajectories) {
      res.trajectories[l].resize(paths);
      for (std::size_t p = 0; p < paths; ++p) res.trajectories[l][p] = slots[p].traj[l];
    }
  }
  return res;
}

}  // namespace

EnsembleResult mc_ensemble(std::span<const MollifiedDrift> levels,
                           std::span<const GaussianPathSet> path_sets, const SolverConfig& cfg,
                           const EnsembleConfig& ecfg) {
  require(!path_sets.empty(), "mc_ensemble: no paths");
  return mc_ensemble_impl(
      levels, [&](std::size_t p) { return path_sets[p]; }, path_sets.size(), cfg, ecfg);
}

EnsembleResult mc_ensemble_seeded(std::span<const MollifiedDrift> levels,
                                  const HurstWeightSpec& spec, std::size_t paths,
                                  std::uint64_t master_seed, const SolverConfig& cfg,
                                  const EnsembleConfig& ecfg) {
  cfg.validate();
  spec.validate();
  const std::vector<double> grid = make_uniform_grid(cfg.T, cfg.steps());
  std::vector<FbmSampler> samplers;
  samplers.reserve(spec.components());
  for (std::size_t n = 0; n < spec.components(); ++n) samplers.emplace_back(spec.H[n], grid);
  return mc_ensemble_impl(
      levels,
      [&](std::size_t p) { return sample_path_set_with(spec, samplers, grid, master_seed, p); },
      paths, cfg, ecfg);
}

}  // namespace sdde
