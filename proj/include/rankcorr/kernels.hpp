#pragma once

// Gaussian kernel machinery behind the rank estimators:
//   Phi, Phi_2              univariate and bivariate standard normal CDFs
//   hbar(x, y, rho)         E sgn(x - U) sgn(y - V), (U, V) ~ N2(0, 0, 1, 1, rho)
//   hbar0(x) = 2 Phi(x) - 1 its factor at rho = 0
//   g = hbar(., ., rho) - hbar(., ., 0),  gbar(x, rho) = int hbar(x, y, rho) phi(y) dy
// and the first-order Hoeffding terms of the Kendall matrix built from them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "rankcorr/linalg.hpp"
#include "rankcorr/matrix.hpp"
#include "rankcorr/parallel.hpp"
#include "rankcorr/rank_estimators.hpp"

namespace rankcorr {

inline double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

/// Phi(x) = erfc(-x / sqrt 2) / 2; libm erfc is accurate to a few ulp.
inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// hbar0(x) = 2 Phi(x) - 1 = erf(x / sqrt 2).
inline double hbar0(double x) { return std::erf(x / std::numbers::sqrt2); }

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussLegendre gauss_legendre(std::size_t n) {
  require(n >= 1, "gauss_legendre: need at least one node");
  GaussLegendre rule{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / static_cast<double>(j);
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double step = p0 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / static_cast<double>(j);
    }
    dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

namespace detail {

// Half-rules (negative nodes only) used by the bivariate normal integrator.
struct HalfRule {
  std::vector<double> x;
  std::vector<double> w;
};

inline const HalfRule& bvn_rule(std::size_t points) {
  static const auto make = [](std::size_t n) {
    const auto full = gauss_legendre(n);
    HalfRule h;
    for (std::size_t i = 0; i < n / 2; ++i) {
      h.x.push_back(full.nodes[i]);
      h.w.push_back(full.weights[i]);
    }
    return h;
  };
  static const HalfRule r6 = make(6), r12 = make(12), r20 = make(20);
  return points == 6 ? r6 : points == 12 ? r12 : r20;
}

// Upper orthant probability P(X > h, Y > k) for correlation r, following
// Genz's BVNU: Drezner-Wesolowsky integral in the correlation for |r| < 0.925,
// and an asymptotic expansion plus correction integral near |r| = 1.
inline double bvn_upper(double h, double k, double r) {
  const auto& rule = bvn_rule(std::abs(r) < 0.3 ? 6 : std::abs(r) < 0.75 ? 12 : 20);
  const double two_pi = 2.0 * std::numbers::pi;
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r);
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      double sn = std::sin(asr * (1.0 + rule.x[i]) / 2.0);
      bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (1.0 - rule.x[i]) / 2.0);
      bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * two_pi) + std_normal_cdf(-h) * std_normal_cdf(-k);
  }
  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) * (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(two_pi) * std_normal_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      for (double sign : {-1.0, 1.0}) {
        double xs = a * (sign * rule.x[i] + 1.0);
        xs *= xs;
        const double rs = std::sqrt(1.0 - xs);
        bvn += a * rule.w[i] *
               (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs - std::exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)));
      }
    }
    bvn = -bvn / two_pi;
  }
  if (r > 0.0) return bvn + std_normal_cdf(-std::max(h, k));
  return -bvn + std::max(0.0, std_normal_cdf(-h) - std_normal_cdf(-k));
}

}  // namespace detail

inline constexpr double kMaxKernelRho = 1.0 - 1e-12;

/// P(Z1 <= x, Z2 <= y) for a standard bivariate normal with correlation rho.
/// Absolute error is around 1e-15 for |rho| <= 1 - 1e-12.
inline double binorm_cdf(double x, double y, double rho) {
  require(std::isfinite(x) && std::isfinite(y), "binorm_cdf: arguments must be finite");
  if (!(std::abs(rho) <= kMaxKernelRho))
    fail(ErrorKind::InvalidInput,
         "binorm_cdf: |rho| = " + std::to_string(std::abs(rho)) +
             " is too close to 1; use the limits min(Phi(x), Phi(y)) for rho -> 1 and "
             "max(0, Phi(x) + Phi(y) - 1) for rho -> -1");
  return std::clamp(detail::bvn_upper(-x, -y, rho), 0.0, 1.0);
}

/// hbar(x, y, rho) = 4 Phi_2(x, y; rho) - 2 Phi(x) - 2 Phi(y) + 1.
inline double hbar(double x, double y, double rho) {
  return 4.0 * binorm_cdf(x, y, rho) - 2.0 * std_normal_cdf(x) - 2.0 * std_normal_cdf(y) + 1.0;
}

/// g(x, y, rho) = hbar(x, y, rho) - hbar(x, y, 0).
inline double g_fn(double x, double y, double rho) {
  if (rho == 0.0) return 0.0;
  return hbar(x, y, rho) - hbar(x, y, 0.0);
}

/// Closed form of dg/dx = 4 phi(x) (Phi((y - rho x) / sqrt(1 - rho^2)) - Phi(y)).
inline double dg_dx(double x, double y, double rho) {
  return 4.0 * std_normal_pdf(x) * (std_normal_cdf((y - rho * x) / std::sqrt(1.0 - rho * rho)) - std_normal_cdf(y));
}

/// Adaptive Gauss-Legendre quadrature: a 15-point panel is accepted when it
/// agrees with its two 15-point halves to within the local tolerance.
template <typename F>
double integrate_adaptive(F&& f, double a, double b, double tol, int max_depth = 30) {
  static const GaussLegendre rule = gauss_legendre(15);
  const auto panel = [&](double lo, double hi) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return s * half;
  };
  const std::function<double(double, double, double, double, int)> recurse =
      [&](double lo, double hi, double whole, double eps, int depth) -> double {
    const double mid = 0.5 * (lo + hi);
    const double left = panel(lo, mid);
    const double right = panel(mid, hi);
    if (std::abs(left + right - whole) <= eps) return left + right;
    if (depth >= max_depth)
      fail(ErrorKind::Numerical, "integrate_adaptive: no convergence on [" + std::to_string(lo) + ", " +
                                     std::to_string(hi) + "]");
    return recurse(lo, mid, left, 0.5 * eps, depth + 1) + recurse(mid, hi, right, 0.5 * eps, depth + 1);
  };
  return recurse(a, b, panel(a, b), tol, 0);
}

inline constexpr double kGbarMaxRho = 0.99;

/// gbar(x, rho) = int hbar(x, y, rho) phi(y) dy over y in [-8.5, 8.5]
/// (the truncated tails carry mass below 2e-17).
inline double gbar(double x, double rho, double tol = 1e-12) {
  require(std::abs(rho) <= kGbarMaxRho, "gbar: need |rho| <= 0.99");
  if (rho == 0.0) return 0.0;
  return integrate_adaptive([&](double y) { return hbar(x, y, rho) * std_normal_pdf(y); }, -8.5, 8.5, tol);
}

/// Delta0 = n^{-1} hbar0(X)^T hbar0(X) - R / 3 with R = rho_pop(sigma).
inline SymMatrix delta0_matrix(const DataMatrix& x, const CorrMatrix& sigma) {
  require(x.d() == sigma.dim(), "delta0_matrix: dimension mismatch");
  const std::size_t n = x.n(), d = x.d();
  Matrix h(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) h(i, j) = hbar0(x(i, j));
  const SymMatrix r = rho_pop(sigma);
  SymMatrix out(d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = j; k < d; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += h(i, j) * h(i, k);
      out.set(j, k, s / static_cast<double>(n) - r(j, k) / 3.0);
    }
  return out;
}

/// First-order Hoeffding term of the Kendall matrix:
/// Delta1_jk = n^{-1} sum_i (hbar(X_ij, X_ik, Sigma_jk) - tau_jk), zero diagonal.
inline SymMatrix delta1_matrix(const DataMatrix& x, const CorrMatrix& sigma) {
  require(x.d() == sigma.dim(), "delta1_matrix: dimension mismatch");
  const std::size_t n = x.n(), d = x.d();
  const SymMatrix tau = tau_pop(sigma);
  const auto pairs = detail::upper_pairs(d);
  std::vector<double> values(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t p) {
    const auto [j, k] = pairs[p];
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += hbar(x(i, j), x(i, k), sigma(j, k));
    values[p] = s / static_cast<double>(n) - tau(j, k);
  });
  SymMatrix out(d);
  for (std::size_t p = 0; p < pairs.size(); ++p) out.set(pairs[p].first, pairs[p].second, values[p]);
  return out;
}

/// Sizes of the Hoeffding pieces of the Kendall matrix for one latent sample,
/// next to the right-hand sides that bound their expectations.
struct HoeffdingReport {
  double residual_frobenius = 0.0;            // ||T_hat - T - 2 Delta1||_F
  double delta1_minus_delta0_spectral = 0.0;  // ||Delta1 - Delta0||_S
  double delta0_spectral = 0.0;               // ||Delta0||_S
  double residual_bound = 0.0;                // 2 d (d-1) / (n (n-1)), bounds E residual^2
  double delta1_minus_delta0_bound = 0.0;     // C1^2 sum_{j!=k} Sigma_jk^2 / n + 4d / (45 n)
  double delta0_bound = 0.0;                  // 5 ||Sigma||_S (sqrt((d+1)/(3n)) + (d+1)/n)
};

inline HoeffdingReport hoeffding_report(const DataMatrix& x, const CorrMatrix& sigma) {
  const double n = static_cast<double>(x.n());
  const double d = static_cast<double>(x.d());
  const SymMatrix t_hat = kendall_tau_matrix(x).values;
  const SymMatrix delta1 = delta1_matrix(x, sigma);
  const SymMatrix delta0 = delta0_matrix(x, sigma);
  HoeffdingReport rep;
  rep.residual_frobenius = norm_frobenius(t_hat - tau_pop(sigma) - 2.0 * delta1);
  rep.delta1_minus_delta0_spectral = spectral_norm(delta1 - delta0);
  rep.delta0_spectral = spectral_norm(delta0);
  rep.residual_bound = 2.0 * d * (d - 1.0) / (n * (n - 1.0));
  double off = 0.0;
  for (std::size_t j = 0; j < sigma.dim(); ++j)
    for (std::size_t k = 0; k < sigma.dim(); ++k)
      if (j != k) off += sigma(j, k) * sigma(j, k);
  const double c1 = 2.0 / std::numbers::pi + 1.0;
  rep.delta1_minus_delta0_bound = c1 * c1 * off / n + 4.0 * d / (45.0 * n);
  rep.delta0_bound = 5.0 * spectral_norm(sigma) * (std::sqrt((d + 1.0) / (3.0 * n)) + (d + 1.0) / n);
  return rep;
}

/// Worst case of one inequality lhs <= rhs over an evaluation grid.
struct InequalityCheck {
  std::string id;
  std::string statement;
  double worst_slack = std::numeric_limits<double>::infinity();  // min(rhs - lhs)
  double x = 0.0, y = 0.0, rho = 0.0;                              // where it occurs
  double max_ratio = 0.0;  // max lhs / rhs over points with rhs > 0 (tightness)
  std::size_t evaluations = 0;

  void observe(double rhs, double lhs, double px, double py, double prho) {
    ++evaluations;
    if (rhs > 0.0) max_ratio = std::max(max_ratio, lhs / rhs);
    const double slack = rhs - lhs;
    if (slack < worst_slack) {
      worst_slack = slack;
      x = px;
      y = py;
      rho = prho;
    }
  }
};

struct SweepReport {
  std::vector<InequalityCheck> checks;

  bool all_hold(double allowance = 1e-9) const {
    return std::all_of(checks.begin(), checks.end(), [&](const auto& c) { return c.worst_slack >= -allowance; });
  }

  const InequalityCheck& find(const std::string& id) const {
    for (const auto& c : checks)
      if (c.id == id) return c;
    fail(ErrorKind::InvalidInput, "no inequality named " + id);
  }
};

struct SweepOptions {
  std::size_t grid_size = 51;     // x and y points on [-4, 4]
  std::size_t rho_points = 21;    // rho points on [-0.99, 0.99]
  double fd_step = 1e-5;          // central differences for derivative bounds
};

namespace detail {
inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}
}  // namespace detail

/// Evaluates the kernel inequalities on grids and records the worst slack
/// of each. Violations are reported, never thrown.
inline SweepReport inequality_sweep(const SweepOptions& opt = {}) {
  require(opt.grid_size >= 2 && opt.rho_points >= 2, "inequality_sweep: grids need at least 2 points");
  const auto xs = detail::linspace(-4.0, 4.0, opt.grid_size);
  const auto rhos = detail::linspace(-0.99, 0.99, opt.rho_points);
  const double h = opt.fd_step;
  SweepReport report;

  {
    InequalityCheck c{"phi_contraction", "max_y |Phi(y) - Phi(y sqrt(1-rho^2))| <= |rho|/2"};
    const auto rho_grid = detail::linspace(-1.0, 1.0, 4 * opt.grid_size + 1);
    auto ys = detail::linspace(-8.0, 8.0, 8 * opt.grid_size + 1);
    ys.push_back(40.0);
    ys.push_back(-40.0);
    for (double rho : rho_grid) {
      const double shrink = std::sqrt(std::max(0.0, 1.0 - rho * rho));
      auto candidates = ys;
      if (rho != 0.0 && std::abs(rho) < 1.0) {
        const double y_star = std::sqrt(-std::log(1.0 - rho * rho)) / std::abs(rho);
        candidates.push_back(y_star);
        candidates.push_back(-y_star);
      }
      for (double y : candidates)
        c.observe(std::abs(rho) / 2.0, std::abs(std_normal_cdf(y) - std_normal_cdf(y * shrink)), 0.0, y, rho);
    }
    report.checks.push_back(c);
  }

  const double c1 = 2.0 / std::numbers::pi + 1.0;
  const double cbar = std::numbers::sqrt2 / std::numbers::pi + 0.5;
  // g and dg/dx on the (x, y, rho) grid, one rho slice per task.
  std::vector<InequalityCheck> g_slices(rhos.size()), dg_slices(rhos.size());
  std::vector<InequalityCheck> gbar_slices(rhos.size()), dgbar_slices(rhos.size());
  parallel_for(rhos.size(), [&](std::size_t r) {
    const double rho = rhos[r];
    for (double x : xs) {
      for (double y : xs) {
        g_slices[r].observe(c1 * std::abs(rho), std::abs(g_fn(x, y, rho)), x, y, rho);
        const double fd = (g_fn(x + h, y, rho) - g_fn(x - h, y, rho)) / (2.0 * h);
        dg_slices[r].observe(std::abs(rho), std::abs(fd), x, y, rho);
      }
      gbar_slices[r].observe(cbar * std::abs(rho), std::abs(gbar(x, rho)), x, 0.0, rho);
      const double fd = (gbar(x + h, rho) - gbar(x - h, rho)) / (2.0 * h);
      dgbar_slices[r].observe(std::abs(rho), std::abs(fd), x, 0.0, rho);
    }
  });
  const auto merge = [](std::string id, std::string statement, const std::vector<InequalityCheck>& slices) {
    InequalityCheck out{std::move(id), std::move(statement)};
    for (const auto& s : slices) {
      out.evaluations += s.evaluations;
      out.max_ratio = std::max(out.max_ratio, s.max_ratio);
      if (s.worst_slack < out.worst_slack) {
        out.worst_slack = s.worst_slack;
        out.x = s.x;
        out.y = s.y;
        out.rho = s.rho;
      }
    }
    return out;
  };
  report.checks.push_back(merge("g_bound", "|g(x,y,rho)| <= (2/pi + 1)|rho|", g_slices));
  report.checks.push_back(merge("dg_dx_bound", "|dg/dx(x,y,rho)| <= |rho| (central differences)", dg_slices));
  report.checks.push_back(merge("gbar_bound", "|gbar(x,rho)| <= (sqrt(2)/pi + 1/2)|rho|", gbar_slices));
  report.checks.push_back(merge("dgbar_dx_bound", "|dgbar/dx(x,rho)| <= |rho| (central differences)", dgbar_slices));

  {
    InequalityCheck c{"dg_constant", "max_{x>0} 4 phi(x) (x/sqrt(2 pi) + 1/2) <= 0.987"};
    for (double x : detail::linspace(0.0, 8.0, 80001))
      c.observe(0.987, 4.0 * std_normal_pdf(x) * (x / std::sqrt(2.0 * std::numbers::pi) + 0.5), x, 0.0, 0.0);
    report.checks.push_back(c);
  }
  {
    InequalityCheck lower{"sine_ordering_lower", "sin(2t/3) <= 2 sin(t/3) on [0, pi/2]"};
    InequalityCheck upper{"sine_ordering_upper", "2 sin(t/3) <= sin(t) on [0, pi/2]"};
    for (double t : detail::linspace(0.0, std::numbers::pi / 2.0, 10000)) {
      lower.observe(2.0 * std::sin(t / 3.0), std::sin(2.0 * t / 3.0), t, 0.0, 0.0);
      upper.observe(std::sin(t), 2.0 * std::sin(t / 3.0), t, 0.0, 0.0);
    }
    report.checks.push_back(lower);
    report.checks.push_back(upper);
  }
  return report;
}

/// CSV: inequality,worst_slack,x,y,rho,max_ratio,evaluations
inline void write_sweep_csv(std::ostream& out, const SweepReport& report) {
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "inequality,worst_slack,x,y,rho,max_ratio,evaluations\n";
  for (const auto& c : report.checks)
    out << c.id << ',' << num(c.worst_slack) << ',' << num(c.x) << ',' << num(c.y) << ',' << num(c.rho) << ','
        << num(c.max_ratio) << ',' << c.evaluations << '\n';
}

}  // namespace rankcorr
