#include "sdde/segment_space.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sdde {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

bool same_grid(const M2Element& a, const M2Element& b) {
  return a.hist.size() == b.hist.size() && std::abs(a.r - b.r) <= 1e-12 * (1.0 + std::abs(a.r));
}

// Nearest integer for a ratio contracted to be integral.
std::size_t integral_ratio(double num, double den, const char* what) {
  require(den > 0.0 && num > 0.0, std::string(what) + ": positive lengths required");
  const double q = num / den;
  const double rounded = std::round(q);
  require(rounded >= 1.0 && std::abs(q - rounded) <= 1e-9 * (1.0 + q),
          std::string(what) + ": ratio " + std::to_string(q) + " is not an integer");
  return static_cast<std::size_t>(rounded);
}

}  // namespace

void M2Element::validate() const {
  require(r > 0.0, "M2Element: r must be positive");
  require(hist.size() >= 2, "M2Element: history needs at least 2 nodes");
  require(std::isfinite(point), "M2Element: non-finite point value");
  for (double v : hist) require(std::isfinite(v), "M2Element: non-finite history value");
}

double m2_inner(const M2Element& x, const M2Element& y) {
  require(same_grid(x, y), "m2_inner: mismatched grids");
  const std::size_t K = x.cells();
  const double du = x.du();
  double acc = 0.5 * (x.hist[0] * y.hist[0] + x.hist[K] * y.hist[K]);
  for (std::size_t k = 1; k < K; ++k) acc += x.hist[k] * y.hist[k];
  return x.point * y.point + du * acc;
}

double m2_norm(const M2Element& x) { return std::sqrt(m2_inner(x, x)); }

const M2Element& BasisSet::e(std::size_t i) const {
  if (i < 1 || i > elems.size()) throw std::invalid_argument("BasisSet: index out of range");
  return elems[i - 1];
}

BasisSet build_basis(double r, std::size_t count, std::size_t K) {
  require(count >= 1, "build_basis: count must be >= 1");
  require(K >= 2, "build_basis: K must be >= 2");
  require(r > 0.0, "build_basis: r must be positive");
  // Aliasing guard: trapezoid orthonormality of the cosine family needs all
  // mode numbers below the grid Nyquist index.
  require(count - 1 <= K, "build_basis: count - 1 must not exceed K");

  BasisSet basis;
  basis.r = r;
  basis.elems.reserve(count);

  M2Element e1;
  e1.point = 1.0;
  e1.r = r;
  e1.hist.assign(K + 1, 0.0);
  basis.elems.push_back(std::move(e1));

  for (std::size_t k = 1; k + 1 <= count; ++k) {
    M2Element ek;
    ek.point = 0.0;
    ek.r = r;
    ek.hist.resize(K + 1);
    if (k == 1) {
      const double c = 1.0 / std::sqrt(r);
      for (std::size_t m = 0; m <= K; ++m) ek.hist[m] = c;
    } else {
      const double c = std::sqrt(2.0 / r);
      const double freq = static_cast<double>(k - 1) * std::numbers::pi / r;
      for (std::size_t m = 0; m <= K; ++m) {
        const double u_plus_r = static_cast<double>(m) * r / static_cast<double>(K);
        ek.hist[m] = c * std::cos(freq * u_plus_r);
      }
    }
    basis.elems.push_back(std::move(ek));
  }
  return basis;
}

namespace {

// int_z^0 of the piecewise-linear interpolant of e's history samples.
double indicator_integral(const M2Element& e, double z) {
  const std::size_t K = e.cells();
  const double du = e.du();
  const double r = e.r;
  if (z >= 0.0) return 0.0;

  // Cell index holding z: z in [u_m, u_{m+1}) with u_m = -r + m du.
  const double pos = (z + r) / du;
  std::size_t m = static_cast<std::size_t>(std::floor(pos));
  if (m >= K) m = K - 1;

  double acc = 0.0;
  for (std::size_t cell = m + 1; cell < K; ++cell)
    acc += 0.5 * du * (e.hist[cell] + e.hist[cell + 1]);

  // Fractional part of the boundary cell, exact for the linear segment.
  const double u_m = -r + static_cast<double>(m) * du;
  const double frac = (z - u_m) / du;  // in [0, 1)
  const double val_z = e.hist[m] + (e.hist[m + 1] - e.hist[m]) * frac;
  const double width = du * (1.0 - frac);
  acc += 0.5 * width * (val_z + e.hist[m + 1]);
  return acc;
}

}  // namespace

double chi(std::size_t j, double z, const BasisSet& basis) {
  const M2Element& ej = basis.e(j);
  require(z >= -ej.r - 1e-12 && z <= 1e-12, "chi: z outside [-r, 0]");
  if (z < -ej.r) z = -ej.r;
  if (z > 0.0) z = 0.0;
  return ej.point + indicator_integral(ej, z);
}

double chi_saturated(std::size_t j, double z, const BasisSet& basis) {
  const M2Element& ej = basis.e(j);
  if (z < -ej.r) z = -ej.r;
  if (z > 0.0) z = 0.0;
  return ej.point + indicator_integral(ej, z);
}

std::size_t SegmentGridConfig::window() const { return integral_ratio(r, dt, "SegmentGridConfig"); }

void SegmentGridConfig::validate() const { (void)window(); }

M2Element segment_extract(std::span<const double> path, double dt, double t,
                          const M2Element& eta) {
  eta.validate();
  require(dt > 0.0, "segment_extract: dt must be positive");
  const std::size_t K = eta.cells();
  require(std::abs(eta.du() - dt) <= 1e-9 * dt,
          "segment_extract: eta grid spacing must equal dt");
  require(!path.empty(), "segment_extract: empty path");

  const double kt_real = t / dt;
  const double kt_round = std::round(kt_real);
  require(kt_round >= 0.0 && std::abs(kt_real - kt_round) <= 1e-9 * (1.0 + kt_real),
          "segment_extract: t is not on the path grid");
  const std::size_t kt = static_cast<std::size_t>(kt_round);
  require(kt < path.size(), "segment_extract: t beyond the path horizon");

  M2Element seg;
  seg.r = eta.r;
  seg.point = path[kt];
  seg.hist.resize(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    // Node k holds x(t - r + k dt): path index kt - K + k when >= 0, else
    // eta node (kt + k) which sits at the same negative time.
    if (kt + k >= K)
      seg.hist[k] = path[kt + k - K];
    else
      seg.hist[k] = eta.hist[kt + k];
  }
  return seg;
}

double segment_functional_F(std::size_t i, double t, const M2Element& phi, const M2Element& eta,
                            const BasisSet& basis) {
  const M2Element& ei = basis.e(i);
  require(same_grid(phi, ei) && same_grid(eta, ei), "segment_functional_F: mismatched grids");
  require(t >= 0.0, "segment_functional_F: t must be >= 0");

  const std::size_t K = ei.cells();
  const double du = ei.du();

  const double kt_real = t / du;
  const double kt_round = std::round(kt_real);
  require(std::abs(kt_real - kt_round) <= 1e-9 * (1.0 + kt_real),
          "segment_functional_F: t is not grid aligned");
  const std::size_t kt = static_cast<std::size_t>(kt_round);

  // Node k sits at time t + u = (kt + k - K) du; negative times read eta at
  // node kt + k, nonnegative ones contribute eta(0) + phi(u).
  double hist_acc = 0.0;
  for (std::size_t k = 0; k <= K; ++k) {
    const double weight = (k == 0 || k == K) ? 0.5 : 1.0;
    double v;
    if (kt + k < K) {
      v = eta.hist[kt + k];
    } else {
      v = eta.point + phi.hist[k];
    }
    hist_acc += weight * v * ei.hist[k];
  }

  return (eta.point + phi.point) * ei.point + du * hist_acc;
}

}  // namespace sdde
