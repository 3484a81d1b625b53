// Batch harness: config parsing, seeding, experiment pipelines, result
// emission. Orchestration is single-threaded; parallel sections live in the
// library with deterministic reduction order.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sdde/assumptions.hpp"
#include "sdde/drift.hpp"
#include "sdde/girsanov.hpp"
#include "sdde/kernels.hpp"
#include "sdde/noise.hpp"
#include "sdde/rng.hpp"
#include "sdde/segment_space.hpp"
#include "sdde/solver.hpp"
#include "sdde/version.hpp"

namespace {

using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    expect(allowed.contains(it.key()), "config: unknown key '" + it.key() + "' in " + where);
}

double jnum(const json& o, const char* key, double fallback, bool* present = nullptr) {
  if (!o.contains(key)) {
    if (present) *present = false;
    return fallback;
  }
  expect(o[key].is_number(), std::string("config: '") + key + "' must be a number");
  if (present) *present = true;
  return o[key].get<double>();
}

std::uint64_t juint(const json& o, const char* key, std::uint64_t fallback) {
  if (!o.contains(key)) return fallback;
  expect(o[key].is_number_unsigned(),
         std::string("config: '") + key + "' must be a nonnegative integer");
  return o[key].get<std::uint64_t>();
}

std::vector<double> jvec(const json& o, const char* key) {
  std::vector<double> v;
  if (!o.contains(key)) return v;
  expect(o[key].is_array(), std::string("config: '") + key + "' must be an array");
  for (const auto& item : o[key]) {
    expect(item.is_number(), std::string("config: '") + key + "' entries must be numbers");
    v.push_back(item.get<double>());
  }
  return v;
}

struct HarnessConfig {
  std::string mode;
  std::uint64_t seed = 1;
  std::size_t paths = 1000;
  std::string out = "out";
  std::size_t dump_paths = 64;

  bool have_solver = false;
  double T = 0.0, dt = 0.0, r = 0.0, eps = 1.0, eta0 = 0.0;
  std::size_t d = 1, basis_count = 0;

  bool have_noise = false;
  sdde::HurstWeightSpec hw;

  bool have_drift = false;
  sdde::DriftSpec drift;

  std::vector<int> levels;
  std::vector<std::size_t> dims;

  bool have_assumptions = false;
  double delta_H = 0.0, delta_T = 0.0;
  std::vector<double> C;  // empty: estimated from the noise spec
  std::size_t sln_m = 16;

  std::vector<double> theta_probes;
  std::size_t probe_count = 0;
  double t_eval = 0.0;
  double beta = -1.0;
  std::vector<std::pair<double, double>> theta_pairs;

  std::vector<std::string> suite = {"shuffle", "simplex", "kernels", "sln", "constants"};

  std::string hash_hex;
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

HarnessConfig parse_config(const json& doc) {
  expect(doc.is_object(), "config: root must be a JSON object");
  check_keys(doc,
             {"mode", "seed", "paths", "out", "dump_paths", "solver", "noise", "drift", "levels",
              "dims", "assumptions", "malliavin", "suite"},
             "root");

  HarnessConfig hc;
  if (doc.contains("mode")) {
    expect(doc["mode"].is_string(), "config: 'mode' must be a string");
    hc.mode = doc["mode"].get<std::string>();
  }
  hc.seed = juint(doc, "seed", 1);
  hc.paths = static_cast<std::size_t>(juint(doc, "paths", 1000));
  expect(hc.paths >= 1, "config: 'paths' must be >= 1");
  if (doc.contains("out")) {
    expect(doc["out"].is_string(), "config: 'out' must be a string");
    hc.out = doc["out"].get<std::string>();
  }
  hc.dump_paths = static_cast<std::size_t>(juint(doc, "dump_paths", 64));

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    check_keys(s, {"T", "dt", "r", "eps", "eta0", "d", "basis_count"}, "solver");
    hc.have_solver = true;
    hc.T = jnum(s, "T", 0.0);
    hc.dt = jnum(s, "dt", 0.0);
    hc.r = jnum(s, "r", 0.0);
    hc.eps = jnum(s, "eps", 1.0);
    hc.eta0 = jnum(s, "eta0", 0.0);
    hc.d = static_cast<std::size_t>(juint(s, "d", 1));
    hc.basis_count = static_cast<std::size_t>(juint(s, "basis_count", 0));
  }

  if (doc.contains("noise")) {
    const json& nz = doc["noise"];
    check_keys(nz, {"H", "w"}, "noise");
    hc.have_noise = true;
    hc.hw.H = jvec(nz, "H");
    expect(!hc.hw.H.empty(), "config: noise.H must be a nonempty array");
    hc.hw.w = nz.contains("w") ? jvec(nz, "w") : sdde::dyadic_weights(hc.hw.H.size());
    hc.hw.validate();
  }

  if (doc.contains("drift")) {
    hc.have_drift = true;
    hc.drift = sdde::drift_from_json(doc["drift"].dump());
  }

  if (doc.contains("levels")) {
    expect(doc["levels"].is_array(), "config: 'levels' must be an array");
    for (const auto& item : doc["levels"]) {
      expect(item.is_number_integer() && item.get<int>() >= 1,
             "config: 'levels' entries must be integers >= 1");
      hc.levels.push_back(item.get<int>());
    }
    for (std::size_t i = 0; i + 1 < hc.levels.size(); ++i)
      expect(hc.levels[i] <= hc.levels[i + 1], "config: 'levels' must be sorted ascending");
  }

  if (doc.contains("dims")) {
    expect(doc["dims"].is_array(), "config: 'dims' must be an array");
    for (const auto& item : doc["dims"]) {
      expect(item.is_number_integer() && item.get<int>() >= 1,
             "config: 'dims' entries must be integers >= 1");
      hc.dims.push_back(static_cast<std::size_t>(item.get<int>()));
    }
    for (std::size_t i = 0; i + 1 < hc.dims.size(); ++i)
      expect(hc.dims[i] < hc.dims[i + 1], "config: 'dims' must be strictly ascending");
  }

  if (doc.contains("assumptions")) {
    const json& a = doc["assumptions"];
    check_keys(a, {"delta_H", "delta_T", "C", "sln_m"}, "assumptions");
    hc.have_assumptions = true;
    hc.delta_H = jnum(a, "delta_H", 0.0);
    hc.delta_T = jnum(a, "delta_T", 0.0);
    hc.C = jvec(a, "C");
    hc.sln_m = static_cast<std::size_t>(juint(a, "sln_m", 16));
  }

  if (doc.contains("malliavin")) {
    const json& m = doc["malliavin"];
    check_keys(m, {"theta_probes", "probe_count", "t_eval", "beta", "theta_pairs"}, "malliavin");
    hc.theta_probes = jvec(m, "theta_probes");
    hc.probe_count = static_cast<std::size_t>(juint(m, "probe_count", 0));
    hc.t_eval = jnum(m, "t_eval", 0.0);
    hc.beta = jnum(m, "beta", -1.0);
    if (m.contains("theta_pairs")) {
      expect(m["theta_pairs"].is_array(), "config: malliavin.theta_pairs must be an array");
      for (const auto& pr : m["theta_pairs"]) {
        expect(pr.is_array() && pr.size() == 2 && pr[0].is_number() && pr[1].is_number(),
               "config: theta_pairs entries must be [a, b] number pairs");
        hc.theta_pairs.emplace_back(pr[0].get<double>(), pr[1].get<double>());
      }
    }
  }

  if (doc.contains("suite")) {
    expect(doc["suite"].is_array(), "config: 'suite' must be an array of names");
    hc.suite.clear();
    for (const auto& item : doc["suite"]) {
      expect(item.is_string(), "config: 'suite' entries must be strings");
      hc.suite.push_back(item.get<std::string>());
    }
  }
  return hc;
}

sdde::SolverConfig make_solver(const HarnessConfig& hc) {
  expect(hc.have_solver, "config: 'solver' section required for this mode");
  sdde::SolverConfig cfg;
  cfg.T = hc.T;
  cfg.dt = hc.dt;
  cfg.r = hc.r;
  cfg.eps = hc.eps;
  cfg.d = hc.d;
  const std::size_t K = cfg.window();
  cfg.eta.point = hc.eta0;
  cfg.eta.hist.assign(K + 1, hc.eta0);
  cfg.eta.r = hc.r;
  const std::size_t count = hc.basis_count ? hc.basis_count : hc.d;
  cfg.basis = sdde::build_basis(hc.r, count, K);
  cfg.validate();
  return cfg;
}

sdde::AssumptionInput make_assumptions(const HarnessConfig& hc) {
  expect(hc.have_assumptions, "config: 'assumptions' section required for this mode");
  expect(hc.have_solver && hc.have_noise && hc.have_drift,
         "config: solver/noise/drift sections required for assumption checks");
  expect(hc.drift.dimension() == hc.d, "config: drift component count must equal solver.d");
  expect(hc.hw.components() >= hc.d, "config: noise needs at least d components");

  sdde::AssumptionInput in;
  in.eps = hc.eps;
  in.delta_H = hc.delta_H;
  in.delta_T = hc.delta_T;
  in.r = hc.r;
  in.T = hc.T;
  in.H.assign(hc.hw.H.begin(), hc.hw.H.begin() + hc.d);
  in.w.assign(hc.hw.w.begin(), hc.hw.w.begin() + hc.d);
  for (std::size_t i = 0; i < hc.d; ++i) in.l1.push_back(hc.drift.comps[i].l1_norm);
  if (!hc.C.empty()) {
    expect(hc.C.size() >= hc.d, "config: assumptions.C needs at least d entries");
    in.C.assign(hc.C.begin(), hc.C.begin() + hc.d);
  } else {
    for (std::size_t i = 0; i < hc.d; ++i)
      in.C.push_back(sdde::estimate_sln_constant(in.H[i], hc.sln_m, hc.T).c_hat);
  }
  return in;
}

// Output plumbing -----------------------------------------------------------

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Emitter {
  std::filesystem::path dir;
  std::string hash;
  std::vector<std::pair<std::string, double>> timings;

  void write_text(const std::string& name, const std::string& text) const {
    std::ofstream os(dir / name, std::ios::binary);
    expect(static_cast<bool>(os), "cannot open output file " + (dir / name).string());
    os << text;
  }

  void write_json(const std::string& name, json j) const {
    j["manifest"] = hash;
    write_text(name, j.dump(2) + "\n");
  }

  void write_manifest(std::uint64_t seed) const {
    json m;
    m["config_hash"] = hash;
    m["seed"] = seed;
    m["version"] = sdde::kVersion;
    double total = 0.0;
    json stages = json::array();
    for (const auto& [name, ms] : timings) {
      stages.push_back({{"name", name}, {"ms", ms}});
      total += ms;
    }
    m["stages"] = stages;
    m["wall_clock_ms"] = total;
    write_text("manifest.json", m.dump(2) + "\n");
  }
};

struct StageTimer {
  Emitter& em;
  std::string name;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  ~StageTimer() {
    const auto t1 = std::chrono::steady_clock::now();
    em.timings.emplace_back(
        name, std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count() / 1000.0);
  }
};

// simulate -------------------------------------------------------------------

int run_simulate(const HarnessConfig& hc, Emitter& em) {
  expect(hc.have_noise && hc.have_drift, "simulate: noise and drift sections required");
  expect(!hc.levels.empty(), "simulate: 'levels' must list at least one mollification level");
  const sdde::SolverConfig cfg = make_solver(hc);
  expect(hc.drift.dimension() == cfg.d, "simulate: drift component count must equal solver.d");
  expect(hc.hw.components() >= cfg.d, "simulate: noise needs at least d components");

  std::vector<sdde::MollifiedDrift> mdrifts;
  {
    StageTimer t{em, "mollify"};
    for (int n : hc.levels) mdrifts.push_back(sdde::mollify(hc.drift, n));
  }

  const std::size_t steps = cfg.steps();
  const std::vector<double> grid = sdde::make_uniform_grid(cfg.T, steps);
  std::vector<sdde::FbmSampler> samplers;
  {
    StageTimer t{em, "factor"};
    for (std::size_t i = 0; i < hc.hw.components(); ++i) samplers.emplace_back(hc.hw.H[i], grid);
  }

  std::ostringstream csv;
  csv << "# schema: trajectories v1\n# manifest: " << em.hash << "\nlevel,path,k,t,x\n";
  std::vector<std::vector<double>> terminal(hc.levels.size(),
                                            std::vector<double>(hc.paths, 0.0));
  {
    StageTimer t{em, "solve"};
    for (std::size_t p = 0; p < hc.paths; ++p) {
      const sdde::GaussianPathSet ps =
          sdde::sample_path_set_with(hc.hw, samplers, grid, hc.seed, p);
      for (std::size_t l = 0; l < mdrifts.size(); ++l) {
        const sdde::TrajectoryResult traj = sdde::euler_solve(mdrifts[l], ps, cfg);
        terminal[l][p] = traj.x[steps];
        if (p < hc.dump_paths) {
          for (std::size_t k = 0; k <= steps; ++k)
            csv << hc.levels[l] << ',' << p << ',' << k << ',' << fmt17(grid[k]) << ','
                << fmt17(traj.x[k]) << '\n';
        }
      }
    }
  }

  json summary;
  summary["mode"] = "simulate";
  summary["version"] = sdde::kVersion;
  summary["seed"] = hc.seed;
  summary["paths"] = hc.paths;
  summary["horizon"] = cfg.T;
  json lv = json::array();
  for (std::size_t l = 0; l < mdrifts.size(); ++l) {
    double mean = 0.0;
    for (double v : terminal[l]) mean += v;
    mean /= static_cast<double>(hc.paths);
    double ss = 0.0;
    for (double v : terminal[l]) ss += (v - mean) * (v - mean);
    const double se = hc.paths >= 2 ? std::sqrt(ss / (static_cast<double>(hc.paths) *
                                                      static_cast<double>(hc.paths - 1)))
                                    : 0.0;
    lv.push_back({{"level", hc.levels[l]}, {"terminal_mean", mean}, {"terminal_se", se}});
  }
  summary["levels"] = lv;

  StageTimer t{em, "emit"};
  em.write_text("trajectories.csv", csv.str());
  em.write_json("summary.json", summary);
  return 0;
}

// verify ---------------------------------------------------------------------

struct Check {
  std::string suite;
  std::string name;
  bool pass = false;
  double observed = 0.0;
  double bound = 0.0;
};

void add_check(std::vector<Check>& out, const std::string& suite, const std::string& name,
               double observed, double bound) {
  out.push_back({suite, name, observed <= bound, observed, bound});
}

void suite_shuffle(std::vector<Check>& out) {
  using sdde::MonomialSpec;
  const sdde::ShuffleSet s11 = sdde::shuffles(1, 1);
  add_check(out, "shuffle", "count_s11", std::abs(static_cast<double>(s11.size()) - 2.0), 0.0);
  add_check(out, "shuffle", "count_s22",
            std::abs(static_cast<double>(sdde::shuffles(2, 2).size()) - 6.0), 0.0);

  const sdde::ShuffleSet s12 = sdde::shuffles(1, 2);
  const std::vector<std::vector<std::size_t>> expected = {{0, 1, 2}, {1, 0, 2}, {2, 0, 1}};
  add_check(out, "shuffle", "s12_enumeration", s12.perms == expected ? 0.0 : 1.0, 0.0);

  const MonomialSpec one1{{0}};
  add_check(out, "shuffle", "product_const",
            sdde::shuffle_product_check(one1, one1, 1, 1, 0.3, 1.1), 1e-13);
  const MonomialSpec lin{{1}};
  add_check(out, "shuffle", "product_linear",
            sdde::shuffle_product_check(lin, one1, 1, 1, 0.0, 1.0), 1e-10);
  const MonomialSpec quad{{2, 1}};
  add_check(out, "shuffle", "product_quadratic",
            sdde::shuffle_product_check(quad, lin, 2, 1, 0.2, 0.9), 1e-10);
  const MonomialSpec pair_const{{0, 0}};
  add_check(out, "shuffle", "square_const",
            sdde::shuffle_square_check(pair_const, 1, 1, 0.0, 0.4, 1.0), 1e-10);
  const MonomialSpec pair_mixed{{1, 2}};
  add_check(out, "shuffle", "square_mixed",
            sdde::shuffle_square_check(pair_mixed, 1, 1, 0.1, 0.5, 1.2), 1e-10);
}

void suite_simplex(std::vector<Check>& out, bool inject_fault) {
  auto closed = [inject_fault](const sdde::SimplexSpec& spec) {
    const double v = sdde::simplex_integral_closed(spec);
    return inject_fault ? v * (1.0 + 1e-3) : v;
  };

  {
    sdde::SimplexSpec sp;
    sp.a = {0.0};
    sp.theta = 0.25;
    sp.t = 1.75;
    add_check(out, "simplex", "unit_exponent", std::abs(closed(sp) - 1.5), 1e-13);
  }
  {
    sdde::SimplexSpec sp;
    sp.a = {-0.5};
    sp.theta = 0.0;
    sp.t = 1.0;
    add_check(out, "simplex", "sqrt_singularity", std::abs(closed(sp) - 2.0), 1e-12);
  }
  {
    double worst = 0.0;
    double factorial = 1.0;
    for (std::size_t m = 1; m <= 4; ++m) {
      factorial *= static_cast<double>(m);
      sdde::SimplexSpec sp;
      sp.a.assign(m, 0.0);
      sp.theta = 0.2;
      sp.t = 1.4;
      const double expected = std::pow(1.2, static_cast<double>(m)) / factorial;
      worst = std::max(worst, std::abs(closed(sp) - expected) / expected);
    }
    add_check(out, "simplex", "zero_exponent_volumes", worst, 1e-13);
  }
}

void suite_kernels(std::vector<Check>& out, std::uint64_t seed) {
  const double r = 1.0;
  const sdde::BasisSet basis = sdde::build_basis(r, 6, 64);

  {
    const std::size_t j[1] = {1};
    const double s[1] = {0.7};
    add_check(out, "kernels", "point_kernel_unit",
              std::abs(sdde::h_kernel(j, s, 0.2, basis) - 1.0), 0.0);
    add_check(out, "kernels", "tilde_collapses",
              std::abs(sdde::h_tilde_kernel(j, s, 0.3, 0.3, basis)), 0.0);
  }

  sdde::NormalStream rng(sdde::derive_seed(seed, 0x6b65726e, 0));
  auto rand_index = [&rng](std::size_t n) {
    // next_uniform is in (0, 1], so the product lands in (0, n]; clamp the
    // boundary draw back into range.
    const auto k = static_cast<std::size_t>(rng.next_uniform() * static_cast<double>(n));
    return k >= n ? n - 1 : k;
  };
  double worst_h = 0.0, worst_tilde = 0.0;
  for (int probe = 0; probe < 10000; ++probe) {
    const std::size_t m = 1 + rand_index(4);
    std::vector<std::size_t> j(m);
    for (auto& idx : j) idx = 1 + rand_index(6);
    const double theta = rng.next_uniform() * 2.0;
    const double theta_p = rng.next_uniform() * 2.0;
    const double t = theta + rng.next_uniform() * 3.0 + 1e-6;
    std::vector<double> s(m);
    for (auto& v : s) v = theta + rng.next_uniform() * (t - theta);
    std::sort(s.rbegin(), s.rend());

    const double h = sdde::h_kernel(j, s, theta, basis);
    worst_h = std::max(worst_h, std::abs(h) - std::pow(1.0 + r, static_cast<double>(m)));
    const double ht = sdde::h_tilde_kernel(j, s, theta, theta_p, basis);
    const double cap = std::pow(1.0 + r, static_cast<double>(m - 1)) *
                       std::sqrt(std::abs(theta - theta_p));
    worst_tilde = std::max(worst_tilde, std::abs(ht) - cap);
  }
  add_check(out, "kernels", "h_bound_probes", worst_h, 1e-9);
  add_check(out, "kernels", "h_tilde_bound_probes", worst_tilde, 1e-9);
}

void suite_sln(std::vector<Check>& out, std::uint64_t seed) {
  add_check(out, "sln", "brownian_exact",
            std::abs(sdde::estimate_sln_constant(0.5, 8, 1.0).c_hat - 1.0), 0.0);

  // 2x2 case at H = 1/4 reduces to (a + b)/d = sqrt(2)/2 by hand.
  add_check(out, "sln", "quarter_2x2",
            std::abs(sdde::estimate_sln_constant(0.25, 2, 1.0).c_hat - std::sqrt(2.0) / 2.0),
            1e-12);

  const double c4 = sdde::estimate_sln_constant(0.25, 4, 1.0).c_hat;
  const double c8 = sdde::estimate_sln_constant(0.25, 8, 1.0).c_hat;
  const double c16 = sdde::estimate_sln_constant(0.25, 16, 1.0).c_hat;
  add_check(out, "sln", "dyadic_nonincreasing",
            std::max(c8 - c4, c16 - c8), 1e-12);

  const double H = 0.3;
  const std::size_t m = 8;
  const double c_hat = sdde::estimate_sln_constant(H, m, 1.0).c_hat;
  const std::vector<double> grid = sdde::make_uniform_grid(1.0, m);
  const std::vector<double> A = sdde::fbm_increment_covariance(H, grid);
  const double dpow = std::pow(1.0 / static_cast<double>(m), 2.0 * H);
  sdde::NormalStream rng(sdde::derive_seed(seed, 0x736c6e, 0));
  double worst = 0.0;
  std::vector<double> xi(m);
  for (int probe = 0; probe < 200; ++probe) {
    rng.fill(xi);
    double quad = 0.0, diag = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      diag += xi[i] * xi[i] * dpow;
      for (std::size_t k = 0; k < m; ++k) quad += xi[i] * A[i * m + k] * xi[k];
    }
    worst = std::max(worst, (c_hat - 1e-12) * diag - quad);
  }
  add_check(out, "sln", "variance_floor_probes", worst, 0.0);
}

void suite_constants(std::vector<Check>& out) {
  const double a_canonical = sdde::compute_Aj(1.0, 0.5, 1.0, 1.0, 1.0);
  add_check(out, "constants", "aj_canonical",
            std::abs(a_canonical - 96.0 * std::sqrt(2.0)), 1e-12 * 96.0 * std::sqrt(2.0));
  add_check(out, "constants", "aj_linear_in_l1",
            std::abs(sdde::compute_Aj(1.0, 0.5, 1.0, 1.0, 2.0) - 2.0 * a_canonical),
            1e-12 * a_canonical);
  add_check(out, "constants", "aj_weight_cubed",
            std::abs(sdde::compute_Aj(1.0, 0.5, 1.0, 0.5, 1.0) - 8.0 * a_canonical),
            1e-12 * 8.0 * a_canonical);

  sdde::AssumptionInput in;
  in.eps = 1.0;
  in.delta_H = 1.0;
  in.delta_T = 0.5;
  in.r = 1.0;
  in.H = {0.1};
  in.w = {1.0};
  in.l1 = {0.0};
  in.C = {1.0};
  const sdde::AssumptionReport rep = sdde::check_assumptions(in);
  add_check(out, "constants", "horizon_example", std::abs(rep.T_max - 0.5), 1e-12);

  in.delta_H = 0.5;
  in.H = {0.4};
  const sdde::AssumptionReport hfail = sdde::check_assumptions(in);
  add_check(out, "constants", "hurst_rejects_04", hfail.hurst_ok ? 1.0 : 0.0, 0.0);

  in.H = {0.1};
  in.l1 = {1.2 / sdde::compute_Aj(1.0, 0.5, 1.0, 1.0, 1.0)};
  const sdde::AssumptionReport afail = sdde::check_assumptions(in);
  add_check(out, "constants", "series_rejects_above_one",
            (!afail.series_ok && std::abs(afail.A_sum - 1.2) <= 1e-9) ? 0.0 : 1.0, 0.0);
}

int run_verify(const HarnessConfig& hc, Emitter& em, bool inject_fault) {
  std::vector<Check> checks;
  {
    StageTimer t{em, "checks"};
    for (const std::string& name : hc.suite) {
      if (name == "shuffle")
        suite_shuffle(checks);
      else if (name == "simplex")
        suite_simplex(checks, inject_fault);
      else if (name == "kernels")
        suite_kernels(checks, hc.seed);
      else if (name == "sln")
        suite_sln(checks, hc.seed);
      else if (name == "constants")
        suite_constants(checks);
      else if (name == "none")
        continue;
      else
        throw ConfigError("verify: unknown suite '" + name + "'");
    }
  }

  std::size_t failed = 0;
  json rows = json::array();
  for (const Check& c : checks) {
    if (!c.pass) ++failed;
    std::printf("[%s] %s/%s observed=%.3e bound=%.3e\n", c.pass ? "PASS" : "FAIL",
                c.suite.c_str(), c.name.c_str(), c.observed, c.bound);
    rows.push_back({{"suite", c.suite},
                    {"name", c.name},
                    {"pass", c.pass},
                    {"observed", c.observed},
                    {"bound", c.bound}});
  }

  json summary;
  summary["mode"] = "verify";
  summary["version"] = sdde::kVersion;
  summary["checks"] = rows;
  summary["n_checks"] = checks.size();
  summary["n_failed"] = failed;
  summary["pass"] = failed == 0;
  StageTimer t{em, "emit"};
  em.write_json("summary.json", summary);
  std::printf("verify: %zu checks, %zu failed\n", checks.size(), failed);
  return failed == 0 ? 0 : 1;
}

// check ----------------------------------------------------------------------

json report_to_json(const sdde::AssumptionReport& rep) {
  json j;
  j["horizon_ok"] = rep.horizon_ok;
  j["T_max"] = rep.T_max;
  j["delta_T_in_paper_range"] = rep.delta_T_in_paper_range;
  j["hurst_ok"] = rep.hurst_ok;
  j["hurst_ceiling"] = rep.hurst_ceiling;
  j["A"] = rep.A;
  j["A_sum"] = rep.A_sum;
  j["series_ok"] = rep.series_ok;
  j["combined_T_max"] = rep.combined_T_max;
  j["T_evaluated"] = rep.T_evaluated;
  j["combined_ok"] = rep.combined_ok;
  j["l1_ceilings"] = rep.l1_ceilings;
  j["all_ok"] = rep.all_ok;
  return j;
}

int run_check(const HarnessConfig& hc, Emitter& em) {
  sdde::AssumptionInput in;
  sdde::AssumptionReport rep;
  {
    StageTimer t{em, "check"};
    in = make_assumptions(hc);
    rep = sdde::check_assumptions(in);
  }
  json summary;
  summary["mode"] = "check";
  summary["version"] = sdde::kVersion;
  summary["input"] = {{"eps", in.eps},     {"delta_H", in.delta_H}, {"delta_T", in.delta_T},
                      {"r", in.r},         {"H", in.H},             {"w", in.w},
                      {"l1", in.l1},       {"C", in.C},             {"T", in.T}};
  summary["report"] = report_to_json(rep);
  StageTimer t{em, "emit"};
  em.write_json("summary.json", summary);
  std::printf("check: horizon %s, hurst %s, series %s, combined %s -> %s\n",
              rep.horizon_ok ? "ok" : "FAIL", rep.hurst_ok ? "ok" : "FAIL",
              rep.series_ok ? "ok" : "FAIL", rep.combined_ok ? "ok" : "FAIL",
              rep.all_ok ? "PASS" : "FAIL");
  return rep.all_ok ? 0 : 1;
}

// converge -------------------------------------------------------------------

int run_converge(const HarnessConfig& hc, Emitter& em) {
  expect(hc.have_noise && hc.have_drift, "converge: noise and drift sections required");
  expect(hc.levels.size() >= 2 || hc.dims.size() >= 2,
         "converge: need at least 2 mollification levels or 2 dimension levels");
  expect(!hc.levels.empty(), "converge: 'levels' must not be empty");

  std::ostringstream csv;
  csv << "# schema: distances v1\n# manifest: " << em.hash << "\nkind,a,b,mean_sq,se,paths\n";

  json summary;
  summary["mode"] = "converge";
  summary["version"] = sdde::kVersion;
  summary["seed"] = hc.seed;
  summary["paths"] = hc.paths;

  if (hc.levels.size() >= 2) {
    sdde::SolverConfig cfg = make_solver(hc);
    expect(hc.drift.dimension() == cfg.d, "converge: drift component count must equal solver.d");
    expect(hc.hw.components() >= cfg.d, "converge: noise needs at least d components");
    std::vector<sdde::MollifiedDrift> mdrifts;
    {
      StageTimer t{em, "mollify"};
      for (int n : hc.levels) mdrifts.push_back(sdde::mollify(hc.drift, n));
    }
    sdde::EnsembleConfig ecfg;
    sdde::EnsembleResult res;
    {
      StageTimer t{em, "levels"};
      res = sdde::mc_ensemble_seeded(mdrifts, hc.hw, hc.paths, hc.seed, cfg, ecfg);
    }
    json rows = json::array();
    bool mono = true;
    for (std::size_t i = 0; i < res.pair_distance.size(); ++i) {
      const auto& [a, b] = res.pair_levels[i];
      const sdde::MeanSE& ms = res.pair_distance[i];
      csv << "level," << a << ',' << b << ',' << fmt17(ms.mean) << ',' << fmt17(ms.se) << ','
          << ms.n << '\n';
      rows.push_back({{"a", a}, {"b", b}, {"mean_sq", ms.mean}, {"se", ms.se}});
      if (i > 0) {
        const sdde::MeanSE& prev = res.pair_distance[i - 1];
        if (ms.mean > prev.mean + prev.se + ms.se) mono = false;
      }
    }
    summary["level_study"] = {{"pairs", rows}, {"nonincreasing_1se", mono}};
  }

  if (hc.dims.size() >= 2) {
    const std::size_t d_max = hc.dims.back();
    expect(hc.drift.dimension() >= d_max, "converge: drift needs components up to max(dims)");
    expect(hc.hw.components() >= d_max, "converge: noise needs components up to max(dims)");

    HarnessConfig base = hc;
    base.d = d_max;
    base.basis_count = std::max<std::size_t>(hc.basis_count, d_max);
    const sdde::SolverConfig cfg_max = make_solver(base);

    std::vector<sdde::MollifiedDrift> bydim;
    std::vector<sdde::SolverConfig> bycfg;
    {
      StageTimer t{em, "truncate"};
      for (std::size_t d : hc.dims) {
        bydim.push_back(sdde::mollify(sdde::truncate_dimension(hc.drift, d), hc.levels.front()));
        sdde::SolverConfig c = cfg_max;
        c.d = d;
        bycfg.push_back(c);
      }
    }

    const std::size_t steps = cfg_max.steps();
    const std::vector<double> grid = sdde::make_uniform_grid(cfg_max.T, steps);
    std::vector<sdde::FbmSampler> samplers;
    for (std::size_t i = 0; i < hc.hw.components(); ++i) samplers.emplace_back(hc.hw.H[i], grid);

    std::vector<std::vector<double>> terminal(hc.dims.size(),
                                              std::vector<double>(hc.paths, 0.0));
    {
      StageTimer t{em, "dims"};
      for (std::size_t p = 0; p < hc.paths; ++p) {
        const sdde::GaussianPathSet ps =
            sdde::sample_path_set_with(hc.hw, samplers, grid, hc.seed, p);
        for (std::size_t di = 0; di < hc.dims.size(); ++di)
          terminal[di][p] = sdde::euler_solve(bydim[di], ps, bycfg[di]).x[steps];
      }
    }

    json rows = json::array();
    for (std::size_t di = 0; di + 1 < hc.dims.size(); ++di) {
      double mean = 0.0;
      std::vector<double> sq(hc.paths);
      for (std::size_t p = 0; p < hc.paths; ++p) {
        const double dv = terminal[di][p] - terminal[di + 1][p];
        sq[p] = dv * dv;
        mean += sq[p];
      }
      mean /= static_cast<double>(hc.paths);
      double ss = 0.0;
      for (double v : sq) ss += (v - mean) * (v - mean);
      const double se = hc.paths >= 2 ? std::sqrt(ss / (static_cast<double>(hc.paths) *
                                                        static_cast<double>(hc.paths - 1)))
                                      : 0.0;
      csv << "dim," << hc.dims[di] << ',' << hc.dims[di + 1] << ',' << fmt17(mean) << ','
          << fmt17(se) << ',' << hc.paths << '\n';
      rows.push_back(
          {{"a", hc.dims[di]}, {"b", hc.dims[di + 1]}, {"mean_sq", mean}, {"se", se}});
    }
    summary["dim_study"] = {{"pairs", rows}, {"level", hc.levels.front()}};
  }

  StageTimer t{em, "emit"};
  em.write_text("distances.csv", csv.str());
  em.write_json("summary.json", summary);
  return 0;
}

// malliavin ------------------------------------------------------------------

int run_malliavin(const HarnessConfig& hc, Emitter& em) {
  expect(hc.have_noise && hc.have_drift, "malliavin: noise and drift sections required");
  expect(!hc.levels.empty(), "malliavin: 'levels' must list at least one mollification level");
  const sdde::SolverConfig cfg = make_solver(hc);

  const sdde::AssumptionInput in = make_assumptions(hc);
  const sdde::AssumptionReport rep = sdde::check_assumptions(in);
  if (!rep.all_ok) {
    std::string which;
    if (!rep.horizon_ok) which = "horizon (eps^3 > delta_T)";
    else if (!rep.hurst_ok) which = "hurst ceiling (H_k < (1 - delta_H)/3)";
    else if (!rep.series_ok) which = "series (sum A_j < 1)";
    else which = "combined horizon (eps^-3 T^delta_H sum A_j < 1)";
    json summary;
    summary["mode"] = "malliavin";
    summary["version"] = sdde::kVersion;
    summary["admissible"] = false;
    summary["failing_assumption"] = which;
    summary["report"] = report_to_json(rep);
    em.write_json("summary.json", summary);
    std::fprintf(stderr, "malliavin: refusing inadmissible configuration; failing assumption: %s\n",
                 which.c_str());
    return 2;
  }

  const double t_eval = hc.t_eval > 0.0 ? hc.t_eval : cfg.T;
  std::vector<double> probes = hc.theta_probes;
  if (probes.empty()) {
    const std::size_t n = hc.probe_count ? hc.probe_count : 9;
    expect(n >= 2, "malliavin: probe_count must be >= 2");
    const std::size_t k_eval = static_cast<std::size_t>(std::llround(t_eval / cfg.dt));
    expect(k_eval % (n - 1) == 0,
           "malliavin: probe_count - 1 must divide t_eval/dt for aligned probes");
    for (std::size_t i = 0; i < n; ++i)
      probes.push_back(static_cast<double>(i * (k_eval / (n - 1))) * cfg.dt);
  }
  expect(probes.size() >= 2 && probes.size() <= 32, "malliavin: need 2..32 theta probes");

  std::vector<std::pair<double, double>> pairs = hc.theta_pairs;
  if (pairs.empty())
    for (std::size_t i = 0; i + 1 < probes.size(); ++i)
      pairs.emplace_back(probes[i], probes[i + 1]);

  // Probe indices for pair endpoints (pairs may repeat a probe).
  auto probe_index = [&probes](double v) {
    for (std::size_t i = 0; i < probes.size(); ++i)
      if (std::abs(probes[i] - v) <= 1e-12 * std::max(1.0, std::abs(v))) return i;
    throw ConfigError("malliavin: theta_pairs entries must be listed in theta_probes");
  };
  std::vector<std::pair<std::size_t, std::size_t>> pair_idx;
  for (const auto& [a, b] : pairs) pair_idx.emplace_back(probe_index(a), probe_index(b));

  const double M = hc.drift.sup_norm_sum();
  const double beta_cap = std::min(in.delta_H, 0.5);
  const double beta = hc.beta > 0.0 ? hc.beta : 0.9 * beta_cap;
  expect(beta < beta_cap, "malliavin: beta must be below min(delta_H, 1/2)");

  std::vector<sdde::MollifiedDrift> mdrifts;
  for (int n : hc.levels) mdrifts.push_back(sdde::mollify(hc.drift, n));

  const std::size_t steps = cfg.steps();
  const std::vector<double> grid = sdde::make_uniform_grid(cfg.T, steps);
  std::vector<sdde::FbmSampler> samplers;
  for (std::size_t i = 0; i < hc.hw.components(); ++i) samplers.emplace_back(hc.hw.H[i], grid);

  const std::size_t L = mdrifts.size();
  const std::size_t P = probes.size();
  std::vector<double> wq(P, 0.0);
  wq[0] = 0.5 * (probes[1] - probes[0]);
  wq[P - 1] = 0.5 * (probes[P - 1] - probes[P - 2]);
  for (std::size_t i = 1; i + 1 < P; ++i) wq[i] = 0.5 * (probes[i + 1] - probes[i - 1]);

  std::vector<std::vector<double>> energy(L, std::vector<double>(hc.paths));
  std::vector<std::vector<std::vector<double>>> pair_sq(
      L, std::vector<std::vector<double>>(pair_idx.size(), std::vector<double>(hc.paths)));
  std::vector<std::vector<double>> holder(L, std::vector<double>(hc.paths));

  {
    StageTimer t{em, "solve"};
    for (std::size_t p = 0; p < hc.paths; ++p) {
      const sdde::GaussianPathSet ps =
          sdde::sample_path_set_with(hc.hw, samplers, grid, hc.seed, p);
      for (std::size_t l = 0; l < L; ++l) {
        const sdde::TrajectoryResult traj = sdde::euler_solve(mdrifts[l], ps, cfg);
        const sdde::FirstVariationResult fv =
            sdde::malliavin_profile(mdrifts[l], traj, ps, cfg, probes, t_eval);
        double en = 0.0;
        for (std::size_t q = 0; q < P; ++q) en += wq[q] * fv.values[q] * fv.values[q];
        energy[l][p] = en;
        for (std::size_t pi = 0; pi < pair_idx.size(); ++pi) {
          const double dv = fv.values[pair_idx[pi].first] - fv.values[pair_idx[pi].second];
          pair_sq[l][pi][p] = dv * dv;
        }
        double hd = 0.0;
        for (std::size_t i = 0; i < P; ++i)
          for (std::size_t jx = i + 1; jx < P; ++jx) {
            const double dv = fv.values[i] - fv.values[jx];
            hd += 2.0 * wq[i] * wq[jx] * dv * dv /
                  std::pow(probes[jx] - probes[i], 1.0 + 2.0 * beta);
          }
        holder[l][p] = hd;
      }
    }
  }

  auto mean_se = [&](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double se = v.size() >= 2 ? std::sqrt(ss / (static_cast<double>(v.size()) *
                                                      static_cast<double>(v.size() - 1)))
                                    : 0.0;
    return std::pair<double, double>(mean, se);
  };

  const sdde::BoundReport energy_bound =
      sdde::malliavin_bounds(in, t_eval, 0.0, 0.0, M, hc.eta0, beta);

  bool violation = false;
  json lv = json::array();
  for (std::size_t l = 0; l < L; ++l) {
    json row;
    row["level"] = hc.levels[l];

    const auto [em_mean, em_se] = mean_se(energy[l]);
    const bool en_viol = em_mean > energy_bound.energy_total + 3.0 * em_se;
    violation = violation || en_viol;
    row["energy"] = {{"mean", em_mean},
                     {"se", em_se},
                     {"bound", energy_bound.energy_total},
                     {"violation", en_viol}};

    json prow = json::array();
    for (std::size_t pi = 0; pi < pair_idx.size(); ++pi) {
      const auto [pm, pse] = mean_se(pair_sq[l][pi]);
      const sdde::BoundReport br = sdde::malliavin_bounds(in, t_eval, pairs[pi].first,
                                                          pairs[pi].second, M, hc.eta0, beta);
      const bool pv = pm > br.difference_bound + 3.0 * pse;
      violation = violation || pv;
      prow.push_back({{"theta_a", pairs[pi].first},
                      {"theta_b", pairs[pi].second},
                      {"mean_sq", pm},
                      {"se", pse},
                      {"bound", br.difference_bound},
                      {"violation", pv}});
    }
    row["pairs"] = prow;

    const auto [hm, hse] = mean_se(holder[l]);
    const bool hv = hm > energy_bound.holder_double_integral + 3.0 * hse;
    violation = violation || hv;
    row["holder"] = {{"mean", hm},
                     {"se", hse},
                     {"bound", energy_bound.holder_double_integral},
                     {"violation", hv}};
    lv.push_back(row);
  }

  json summary;
  summary["mode"] = "malliavin";
  summary["version"] = sdde::kVersion;
  summary["admissible"] = true;
  summary["seed"] = hc.seed;
  summary["paths"] = hc.paths;
  summary["t_eval"] = t_eval;
  summary["beta"] = beta;
  summary["theta_probes"] = probes;
  summary["report"] = report_to_json(rep);
  summary["levels"] = lv;
  summary["violation"] = violation;
  StageTimer t{em, "emit"};
  em.write_json("summary.json", summary);
  std::printf("malliavin: %zu levels, %zu probes -> %s\n", L, P,
              violation ? "VIOLATION" : "within bounds");
  return violation ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and verification toolkit for singular delay equations"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t paths = 0;
  std::string out_dir;
  std::vector<std::string> suite;
  bool inject_fault = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON experiment configuration");
    sub->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
      seed_given = true;
    });
    sub->add_option("--paths", paths, "Monte Carlo path count override");
    sub->add_option("--out", out_dir, "output directory override");
    sub->add_option("--suite", suite, "verification suites to run ('none' clears)")
        ->delimiter(',');
    return sub;
  };

  CLI::App* cmd_simulate = add_common(app.add_subcommand("simulate", "Euler paths + dumps"));
  CLI::App* cmd_verify = add_common(app.add_subcommand("verify", "exact-identity suite"));
  cmd_verify->add_flag("--inject-fault", inject_fault,
                       "perturb the simplex closed form by 1e-3 (fault-injection check)");
  CLI::App* cmd_check = add_common(app.add_subcommand("check", "assumption checker"));
  CLI::App* cmd_converge = add_common(app.add_subcommand("converge", "level/dimension study"));
  CLI::App* cmd_malliavin =
      add_common(app.add_subcommand("malliavin", "first-variation bounds study"));

  CLI11_PARSE(app, argc, argv);

  std::string mode;
  if (cmd_simulate->parsed()) mode = "simulate";
  if (cmd_verify->parsed()) mode = "verify";
  if (cmd_check->parsed()) mode = "check";
  if (cmd_converge->parsed()) mode = "converge";
  if (cmd_malliavin->parsed()) mode = "malliavin";

  try {
    json doc = json::object();
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      expect(static_cast<bool>(is), "cannot open config file " + config_path);
      try {
        doc = json::parse(is);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
      }
    } else {
      expect(mode == "verify", "a --config file is required for this mode");
    }

    // CLI overrides land in the document before hashing: the manifest hash
    // covers exactly the resolved inputs.
    if (seed_given) doc["seed"] = seed;
    if (paths != 0) doc["paths"] = paths;
    if (!out_dir.empty()) doc["out"] = out_dir;
    if (!suite.empty()) doc["suite"] = suite;
    if (doc.contains("mode"))
      expect(doc["mode"].is_string() && doc["mode"].get<std::string>() == mode,
             "config: 'mode' does not match the invoked subcommand");
    doc["mode"] = mode;

    HarnessConfig hc = parse_config(doc);
    expect(hc.mode == mode, "config: mode mismatch");
    hc.hash_hex = hex16(fnv1a(doc.dump()));

    Emitter em;
    em.dir = hc.out;
    em.hash = hc.hash_hex;
    std::filesystem::create_directories(em.dir);

    int rc = 0;
    if (mode == "simulate")
      rc = run_simulate(hc, em);
    else if (mode == "verify")
      rc = run_verify(hc, em, inject_fault);
    else if (mode == "check")
      rc = run_check(hc, em);
    else if (mode == "converge")
      rc = run_converge(hc, em);
    else
      rc = run_malliavin(hc, em);

    em.write_manifest(hc.seed);
    return rc;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
