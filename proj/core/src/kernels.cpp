#include "sdde/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdde {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

ShuffleSet shuffles(std::size_t m, std::size_t n) {
  require(m >= 1 && n >= 1, "shuffles: m and n must be >= 1");
  require(m + n <= 12, "shuffles: m + n exceeds the enumeration cap of 12");
  const std::size_t total = m + n;

  ShuffleSet out;
  out.m = m;
  out.n = n;

  // Enumerate position subsets sigma({1..m}) in lexicographic order via the
  // standard combination walk; the complement receives {m+1..m+n} in order.
  std::vector<std::size_t> pos(m);
  for (std::size_t i = 0; i < m; ++i) pos[i] = i;
  while (true) {
    std::vector<std::size_t> perm(total);
    std::vector<bool> taken(total, false);
    for (std::size_t i = 0; i < m; ++i) {
      perm[i] = pos[i];
      taken[pos[i]] = true;
    }
    std::size_t next = 0;
    for (std::size_t i = m; i < total; ++i) {
      while (taken[next]) ++next;
      perm[i] = next;
      taken[next] = true;
    }
    out.perms.push_back(std::move(perm));

    // Advance the combination.
    std::size_t k = m;
    while (k > 0 && pos[k - 1] == total - m + (k - 1)) --k;
    if (k == 0) break;
    ++pos[k - 1];
    for (std::size_t i = k; i < m; ++i) pos[i] = pos[i - 1] + 1;
  }
  return out;
}

namespace {

// Gauss-Legendre rule on [-1, 1]: Newton iteration on the Legendre
// recurrence, roots polished to machine precision. An N-point rule is exact
// through degree 2N - 1.
struct QuadRule {
  std::vector<double> x, w;
};

QuadRule gauss_legendre(std::size_t n) {
  QuadRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 64; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk =
            ((2.0 * static_cast<double>(k) - 1.0) * x * p1 - (static_cast<double>(k) - 1.0) * p0) /
            static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.x[i] = x;
    rule.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

/// Nesting depth d with power sum P accumulates an integrand of degree at
/// most P + d - 1 at the outermost level; size the rule to keep every level
/// exact.
QuadRule rule_for(std::span<const unsigned> powers) {
  std::size_t deg = powers.size();
  for (unsigned p : powers) deg += p;
  return gauss_legendre(std::max<std::size_t>(8, (deg + 1) / 2));
}

double pow_u(double x, unsigned p) {
  double acc = 1.0;
  for (unsigned i = 0; i < p; ++i) acc *= x;
  return acc;
}

/// Nested Gauss-Legendre over {theta <= s_M < ... < s_{level} <= upper} of
/// prod_{i >= level} s_i^{powers[i-1]}; exact for the monomial integrands here.
double nested_monomial(std::span<const unsigned> powers, const QuadRule& rule, std::size_t level,
                       double theta, double upper) {
  if (level > powers.size()) return 1.0;
  const double half = 0.5 * (upper - theta);
  const double mid = 0.5 * (upper + theta);
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.x.size(); ++q) {
    const double s = mid + half * rule.x[q];
    acc += rule.w[q] * pow_u(s, powers[level - 1]) *
           nested_monomial(powers, rule, level + 1, theta, s);
  }
  return half * acc;
}

double simplex_monomial(std::span<const unsigned> powers, double theta, double t) {
  if (powers.empty()) return 1.0;
  return nested_monomial(powers, rule_for(powers), 1, theta, t);
}

constexpr unsigned kMaxMonomialPower = 7;  // keeps the sized rules small

void check_monomial(const MonomialSpec& f, const char* what) {
  for (unsigned p : f.powers)
    if (p > kMaxMonomialPower) throw std::invalid_argument(what);
}

}  // namespace

double shuffle_product_check(const MonomialSpec& f, const MonomialSpec& g, std::size_t m,
                             std::size_t n, double theta, double t) {
  require(f.arity() == m && g.arity() == n, "shuffle_product_check: arity mismatch");
  require(m >= 1 && n >= 1 && m + n <= 6, "shuffle_product_check: m + n must lie in [2, 6]");
  require(t > theta, "shuffle_product_check: need t > theta");
  check_monomial(f, "shuffle_product_check: monomial power exceeds the quadrature cap");
  check_monomial(g, "shuffle_product_check: monomial power exceeds the quadrature cap");

  const double lhs = simplex_monomial(f.powers, theta, t) * simplex_monomial(g.powers, theta, t);

  const ShuffleSet S = shuffles(m, n);
  double rhs = 0.0;
  std::vector<unsigned> combined(m + n);
  for (const auto& sigma : S.perms) {
    std::fill(combined.begin(), combined.end(), 0u);
    for (std::size_t k = 0; k < m; ++k) combined[sigma[k]] += f.powers[k];
    for (std::size_t k = 0; k < n; ++k) combined[sigma[m + k]] += g.powers[k];
    rhs += simplex_monomial(combined, theta, t);
  }
  return std::abs(lhs - rhs);
}

std::vector<std::size_t> square_index_map(std::span<const std::size_t> sigma,
                                          std::span<const std::size_t> tau, std::size_t m,
                                          std::size_t n) {
  require(sigma.size() == 2 * m && tau.size() == 2 * n, "square_index_map: length mismatch");
  std::vector<std::size_t> map(2 * (m + n));
  for (std::size_t l = 0; l < 2 * (m + n); ++l) {
    const std::size_t pos = l + 1;  // 1-based position in the doubled product
    if (pos <= m)
      map[l] = sigma[pos - 1];
    else if (pos <= m + n)
      map[l] = 2 * m + tau[pos - m - 1];
    else if (pos <= 2 * m + n)
      map[l] = sigma[pos - n - 1];
    else
      map[l] = 2 * m + tau[pos - 2 * m - 1];
  }
  return map;
}

double shuffle_square_check(const MonomialSpec& f, std::size_t m, std::size_t n, double theta,
                            double theta_p, double t) {
  require(f.arity() == m + n, "shuffle_square_check: f must take m + n arguments");
  require(m >= 1 && n >= 1 && 2 * (m + n) <= 8,
          "shuffle_square_check: 2(m + n) must not exceed 8");
  require(theta < theta_p && theta_p < t, "shuffle_square_check: need theta < theta' < t");
  check_monomial(f, "shuffle_square_check: monomial power exceeds the quadrature cap");

  // The product domain factorizes for monomials: upper block args 1..m on
  // Delta^m_{theta_p,t}, lower block args m+1..m+n on Delta^n_{theta,theta_p}.
  const std::span<const unsigned> up(f.powers.data(), m);
  const std::span<const unsigned> low(f.powers.data() + m, n);
  const double single = simplex_monomial(up, theta_p, t) * simplex_monomial(low, theta, theta_p);
  const double lhs = single * single;

  const ShuffleSet Sm = shuffles(m, m);
  const ShuffleSet Sn = shuffles(n, n);
  double rhs = 0.0;
  std::vector<unsigned> pow_up(2 * m), pow_low(2 * n);
  for (const auto& sigma : Sm.perms)
    for (const auto& tau : Sn.perms) {
      const std::vector<std::size_t> map = square_index_map(sigma, tau, m, n);
      std::fill(pow_up.begin(), pow_up.end(), 0u);
      std::fill(pow_low.begin(), pow_low.end(), 0u);
      for (int factor = 0; factor < 2; ++factor)
        for (std::size_t i = 0; i < m + n; ++i) {
          const std::size_t var = map[factor * (m + n) + i];
          if (var < 2 * m)
            pow_up[var] += f.powers[i];
          else
            pow_low[var - 2 * m] += f.powers[i];
        }
      rhs += simplex_monomial(pow_up, theta_p, t) * simplex_monomial(pow_low, theta, theta_p);
    }
  return std::abs(lhs - rhs);
}

void SimplexSpec::validate() const {
  require(!a.empty(), "SimplexSpec: empty exponent list");
  for (double aj : a) require(aj > -1.0, "SimplexSpec: exponents must exceed -1");
  require(t > theta, "SimplexSpec: need t > theta");
}

double simplex_integral_closed(const SimplexSpec& spec) {
  spec.validate();
  double log_num = 0.0;
  double a_sum = 0.0;
  for (double aj : spec.a) {
    log_num += std::lgamma(aj + 1.0);
    a_sum += aj;
  }
  const double order = a_sum + static_cast<double>(spec.m());
  const double log_den = std::lgamma(order + 1.0);
  return std::exp(log_num - log_den + order * std::log(spec.t - spec.theta));
}

double h_kernel(std::span<const std::size_t> j, std::span<const double> s, double theta,
                const BasisSet& basis) {
  require(j.size() == s.size() && !j.empty(), "h_kernel: index/point length mismatch");
  const std::size_t m = j.size();
  for (std::size_t l = 0; l + 1 < m; ++l)
    require(s[l] >= s[l + 1], "h_kernel: points must descend");
  require(s[m - 1] >= theta, "h_kernel: points must stay above theta");

  double prod = chi_saturated(j[m - 1], theta - s[m - 1], basis);
  for (std::size_t l = 0; l + 1 < m; ++l) prod *= chi_saturated(j[l], s[l + 1] - s[l], basis);
  return prod;
}

double h_tilde_kernel(std::span<const std::size_t> j, std::span<const double> s, double theta,
                      double theta_p, const BasisSet& basis) {
  require(j.size() == s.size() && !j.empty(), "h_tilde_kernel: index/point length mismatch");
  const std::size_t m = j.size();
  for (std::size_t l = 0; l + 1 < m; ++l)
    require(s[l] >= s[l + 1], "h_tilde_kernel: points must descend");

  double prod = chi_saturated(j[m - 1], theta - s[m - 1], basis) -
                chi_saturated(j[m - 1], theta_p - s[m - 1], basis);
  for (std::size_t l = 0; l + 1 < m; ++l) prod *= chi_saturated(j[l], s[l + 1] - s[l], basis);
  return prod;
}

}  // namespace sdde
