#include "sdde/noise.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace sdde {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

constexpr std::size_t kGridCap = 4096;
constexpr double kJitterCap = 1e-10;

double fbm_cov(double H, double s, double t) {
  const double h2 = 2.0 * H;
  return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
}

}  // namespace

void HurstWeightSpec::validate() const {
  require(H.size() == w.size(), "HurstWeightSpec: H and w lengths differ");
  for (double h : H) require(h > 0.0 && h < 0.5, "HurstWeightSpec: H must lie in (0, 1/2)");
  for (double wi : w) require(wi > 0.0 && wi <= 1.0, "HurstWeightSpec: w must lie in (0, 1]");
}

double HurstWeightSpec::weight_l1() const {
  double acc = 0.0;
  for (double wi : w) acc += std::abs(wi);
  return acc;
}

std::vector<double> dyadic_weights(std::size_t count) {
  std::vector<double> w(count);
  double v = 1.0;
  for (std::size_t n = 0; n < count; ++n) {
    v *= 0.5;
    w[n] = v;
  }
  return w;
}

double GaussianPathSet::dt() const {
  require(grid.size() >= 2, "GaussianPathSet: grid too short");
  return grid[1] - grid[0];
}

std::vector<double> make_uniform_grid(double T, std::size_t steps) {
  require(T > 0.0 && steps >= 1, "make_uniform_grid: need T > 0 and steps >= 1");
  std::vector<double> g(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k)
    g[k] = T * static_cast<double>(k) / static_cast<double>(steps);
  return g;
}

std::vector<double> sample_brownian(std::span<const double> grid, NormalStream& rng) {
  require(grid.size() >= 2, "sample_brownian: grid needs at least 2 nodes");
  std::vector<double> W(grid.size());
  W[0] = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double dt = grid[k] - grid[k - 1];
    require(dt > 0.0, "sample_brownian: grid not increasing");
    W[k] = W[k - 1] + std::sqrt(dt) * rng.next();
  }
  return W;
}

FbmSampler::FbmSampler(double H, std::span<const double> grid) : H_(H) {
  require(H > 0.0 && H < 1.0, "FbmSampler: H must lie in (0, 1)");
  require(grid.size() >= 2 && grid[0] == 0.0, "FbmSampler: grid must start at 0");
  require(grid.size() - 1 <= kGridCap, "FbmSampler: grid exceeds the 4096-node cap");
  grid_.assign(grid.begin(), grid.end());
  M_ = grid.size() - 1;

  Eigen::MatrixXd R(M_, M_);
  for (std::size_t i = 0; i < M_; ++i)
    for (std::size_t j = 0; j < M_; ++j) R(i, j) = fbm_cov(H, grid_[i + 1], grid_[j + 1]);
  R = 0.5 * (R + R.transpose()).eval();

  const double max_diag = R.diagonal().maxCoeff();
  double jitter = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  while (llt.info() != Eigen::Success) {
    jitter = (jitter == 0.0) ? 1e-14 * max_diag : 10.0 * jitter;
    if (jitter > kJitterCap * max_diag)
      throw std::runtime_error("FbmSampler: covariance not positive definite within jitter cap");
    llt.compute(R + jitter * Eigen::MatrixXd::Identity(M_, M_));
  }
  jitter_ = jitter;

  Eigen::MatrixXd L = llt.matrixL();
  L_.assign(M_ * M_, 0.0);
  for (std::size_t i = 0; i < M_; ++i)
    for (std::size_t j = 0; j <= i; ++j) L_[i * M_ + j] = L(i, j);
}

std::vector<double> FbmSampler::transform(std::span<const double> z) const {
  require(z.size() == M_, "FbmSampler: normal vector has wrong length");
  std::vector<double> path(M_ + 1);
  path[0] = 0.0;
  for (std::size_t i = 0; i < M_; ++i) {
    double acc = 0.0;
    const double* row = &L_[i * M_];
    for (std::size_t j = 0; j <= i; ++j) acc += row[j] * z[j];
    path[i + 1] = acc;
  }
  return path;
}

std::vector<double> FbmSampler::sample(NormalStream& rng) const {
  std::vector<double> z(M_);
  rng.fill(z);
  return transform(z);
}

std::vector<double> sample_fbm(double H, std::span<const double> grid, NormalStream& rng) {
  FbmSampler sampler(H, grid);
  return sampler.sample(rng);
}

GaussianPathSet sample_path_set(const HurstWeightSpec& spec, std::span<const double> grid,
                                std::uint64_t master_seed, std::uint64_t path_id) {
  spec.validate();
  std::vector<FbmSampler> samplers;
  samplers.reserve(spec.components());
  for (std::size_t n = 0; n < spec.components(); ++n) samplers.emplace_back(spec.H[n], grid);
  return sample_path_set_with(spec, samplers, grid, master_seed, path_id);
}

GaussianPathSet sample_path_set_with(const HurstWeightSpec& spec,
                                     std::span<const FbmSampler> samplers,
                                     std::span<const double> grid, std::uint64_t master_seed,
                                     std::uint64_t path_id) {
  require(samplers.size() == spec.components(),
          "sample_path_set_with: sampler count mismatch");
  GaussianPathSet ps;
  ps.grid.assign(grid.begin(), grid.end());
  ps.w = spec.w;
  ps.master_seed = master_seed;
  ps.path_id = path_id;

  NormalStream w_stream(derive_seed(master_seed, path_id, 0));
  ps.W = sample_brownian(grid, w_stream);

  ps.B.reserve(spec.components());
  for (std::size_t n = 0; n < spec.components(); ++n) {
    NormalStream b_stream(derive_seed(master_seed, path_id, n + 1));
    ps.B.push_back(samplers[n].sample(b_stream));
  }
  return ps;
}

std::vector<std::vector<double>> perturbation_coefficients(const GaussianPathSet& ps) {
  require(ps.w.size() == ps.B.size(), "perturbation_coefficients: weight/path mismatch");
  std::vector<std::vector<double>> out(ps.B.size());
  for (std::size_t n = 0; n < ps.B.size(); ++n) {
    out[n].resize(ps.B[n].size());
    for (std::size_t k = 0; k < ps.B[n].size(); ++k) out[n][k] = ps.w[n] * ps.B[n][k];
  }
  return out;
}

std::vector<double> fbm_increment_covariance(double H, std::span<const double> grid) {
  require(grid.size() >= 2 && grid[0] == 0.0, "fbm_increment_covariance: grid must start at 0");
  const std::size_t m = grid.size() - 1;
  std::vector<double> A(m * m);
  const double h2 = 2.0 * H;
  auto p = [h2](double x) { return std::pow(std::abs(x), h2); };
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      // Cov(B(t_i)-B(t_{i-1}), B(t_j)-B(t_{j-1})), expanded in covariance terms.
      const double v = 0.5 * (p(grid[i] - grid[j - 1]) + p(grid[i - 1] - grid[j]) -
                              p(grid[i] - grid[j]) - p(grid[i - 1] - grid[j - 1]));
      A[(i - 1) * m + (j - 1)] = v;
    }
  }
  return A;
}

SLNEstimate estimate_sln_constant(double H, std::size_t m, double span) {
  require(H > 0.0 && H < 1.0, "estimate_sln_constant: H must lie in (0, 1)");
  require(m >= 2, "estimate_sln_constant: need at least 2 increments");
  require(span > 0.0, "estimate_sln_constant: span must be positive");

  SLNEstimate est;
  est.H = H;
  est.m = m;
  est.span = span;

  if (H == 0.5) {
    // Brownian increments over disjoint intervals are independent with
    // variance dt; the quadratic-form ratio is identically 1.
    est.c_hat = 1.0;
    return est;
  }

  const std::vector<double> grid = make_uniform_grid(span, m);
  const std::vector<double> A_flat = fbm_increment_covariance(H, grid);

  Eigen::MatrixXd A(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) A(i, j) = A_flat[i * m + j];
  A = 0.5 * (A + A.transpose()).eval();

  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    const double dt = grid[i + 1] - grid[i];
    const double d = std::pow(dt, 2.0 * H);
    require(d > 0.0, "estimate_sln_constant: singular diagonal");
    D(i, i) = d;
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(A, D,
                                                                   Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("estimate_sln_constant: eigen solver failed");
  est.c_hat = solver.eigenvalues().minCoeff();
  return est;
}

void dump_paths_csv(std::ostream& os, const GaussianPathSet& ps) {
  char buf[64];
  auto emit = [&os, &buf](std::uint64_t pid, const std::string& comp, std::size_t k, double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << pid << ',' << comp << ',' << k << ',' << buf << '\n';
  };
  for (std::size_t k = 0; k < ps.W.size(); ++k) emit(ps.path_id, "W", k, ps.W[k]);
  for (std::size_t n = 0; n < ps.B.size(); ++n) {
    const std::string name = "B" + std::to_string(n + 1);
    for (std::size_t k = 0; k < ps.B[n].size(); ++k) emit(ps.path_id, name, k, ps.B[n][k]);
  }
}

}  // namespace sdde
