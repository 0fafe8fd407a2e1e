#pragma once

// Seeded Monte Carlo experiments over (n, d) grids.
//
// Every (cell, replicate) pair draws one latent sample from a seed derived
// from (seed, cell index, replicate), so any cell can be rerun on its own
// and results never depend on the number of worker threads. Each record
// lands in a slot fixed by its position in the grid.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "rankcorr/copula.hpp"
#include "rankcorr/kernels.hpp"
#include "rankcorr/linalg.hpp"
#include "rankcorr/parallel.hpp"
#include "rankcorr/random.hpp"
#include "rankcorr/rank_estimators.hpp"
#include "rankcorr/regularize.hpp"

namespace rankcorr {

enum class Estimator { Tau, Rho, Oracle };

inline std::string estimator_name(Estimator e) {
  switch (e) {
    case Estimator::Tau: return "tau";
    case Estimator::Rho: return "rho";
    case Estimator::Oracle: return "oracle";
  }
  return "?";
}

inline Estimator parse_estimator(std::string_view name) {
  if (name == "tau") return Estimator::Tau;
  if (name == "rho") return Estimator::Rho;
  if (name == "oracle") return Estimator::Oracle;
  fail(ErrorKind::InvalidInput, "unknown estimator '" + std::string(name) + "' (expected tau, rho or oracle)");
}

/// Error functionals of an estimate against the population matrix.
enum class FunctionalKind {
  SpecErr,            // ||hat - Sigma||_S
  MaxErr,             // max |hat - Sigma|
  SparseSpecErr,      // max_{|A|=s} ||(hat - Sigma)_{AxA}||_S
  TaperErr,           // ||taper_k(hat) - Sigma||_S^2
  SinAngleSparse,     // sin angle(sparse_pca(hat, s), leading vector of Sigma)
  SupportHit,         // 1 if the sparse PCA support equals the population one
  ProjDist,           // ||P_k(Sigma) - P_k(hat)||_S
  HoeffdingResidual,  // ||T_hat - T - 2 Delta1||_F^2 (Kendall only)
  Delta0Spec          // ||Delta0||_S of the latent sample
};

struct Functional {
  FunctionalKind kind = FunctionalKind::SpecErr;
  std::size_t param = 0;        // s for sparse kinds, k for taper and projection
  bool auto_bandwidth = false;  // taper with optimal_bandwidth(n, d, alpha)

  static Functional spec_err() { return {FunctionalKind::SpecErr}; }
  static Functional max_err() { return {FunctionalKind::MaxErr}; }
  static Functional sparse_spec_err(std::size_t s) { return {FunctionalKind::SparseSpecErr, s}; }
  static Functional taper_err(std::size_t k) { return {FunctionalKind::TaperErr, k}; }
  static Functional taper_err_auto() { return {FunctionalKind::TaperErr, 0, true}; }
  static Functional sin_angle_sparse(std::size_t s) { return {FunctionalKind::SinAngleSparse, s}; }
  static Functional support_hit(std::size_t s) { return {FunctionalKind::SupportHit, s}; }
  static Functional proj_dist(std::size_t k) { return {FunctionalKind::ProjDist, k}; }
  static Functional hoeffding_residual() { return {FunctionalKind::HoeffdingResidual}; }
  static Functional delta0_spec() { return {FunctionalKind::Delta0Spec}; }

  std::string name() const {
    const std::string p = std::to_string(param);
    switch (kind) {
      case FunctionalKind::SpecErr: return "spec_err";
      case FunctionalKind::MaxErr: return "max_err";
      case FunctionalKind::SparseSpecErr: return "sparse_spec_err[s=" + p + "]";
      case FunctionalKind::TaperErr: return auto_bandwidth ? "taper_err[auto]" : "taper_err[k=" + p + "]";
      case FunctionalKind::SinAngleSparse: return "sin_angle_sparse[s=" + p + "]";
      case FunctionalKind::SupportHit: return "support_hit[s=" + p + "]";
      case FunctionalKind::ProjDist: return "proj_dist[k=" + p + "]";
      case FunctionalKind::HoeffdingResidual: return "hoeffding_residual";
      case FunctionalKind::Delta0Spec: return "delta0_spec";
    }
    return "?";
  }

  /// Inverse of name().
  static Functional parse(std::string_view text) {
    const auto bad = [&]() -> Functional { fail(ErrorKind::InvalidInput, "unknown functional '" + std::string(text) + "'"); };
    const auto open = text.find('[');
    const std::string_view base = text.substr(0, open);
    std::optional<std::size_t> value;
    bool is_auto = false;
    if (open != std::string_view::npos) {
      if (text.back() != ']') return bad();
      const std::string_view inner = text.substr(open + 1, text.size() - open - 2);
      if (inner == "auto") {
        is_auto = true;
      } else {
        if (inner.size() < 3 || inner[1] != '=') return bad();
        const std::string digits(inner.substr(2));
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) return bad();
        value = std::stoull(digits);
        const char key = inner[0];
        const bool wants_s = base == "sparse_spec_err" || base == "sin_angle_sparse" || base == "support_hit";
        if ((wants_s && key != 's') || (!wants_s && key != 'k')) return bad();
      }
    }
    const auto with_param = [&](FunctionalKind kind) -> Functional {
      if (!value) return bad();
      return {kind, *value};
    };
    if (open == std::string_view::npos) {
      if (base == "spec_err") return spec_err();
      if (base == "max_err") return max_err();
      if (base == "hoeffding_residual") return hoeffding_residual();
      if (base == "delta0_spec") return delta0_spec();
      return bad();
    }
    if (base == "taper_err") return is_auto ? taper_err_auto() : with_param(FunctionalKind::TaperErr);
    if (is_auto) return bad();
    if (base == "sparse_spec_err") return with_param(FunctionalKind::SparseSpecErr);
    if (base == "sin_angle_sparse") return with_param(FunctionalKind::SinAngleSparse);
    if (base == "support_hit") return with_param(FunctionalKind::SupportHit);
    if (base == "proj_dist") return with_param(FunctionalKind::ProjDist);
    return bad();
  }

  friend bool operator==(const Functional&, const Functional&) = default;
};

inline constexpr std::size_t kDefaultMaxDim = 4096;

struct ExperimentConfig {
  SigmaModel model = SigmaModel::ar1(1, 0.0);  // dim is taken from d_grid
  std::vector<Transform> transforms{Transform::Identity};  // cycled across columns
  std::vector<Estimator> estimators{Estimator::Tau};
  std::vector<std::size_t> n_grid;
  std::vector<std::size_t> d_grid;
  std::size_t reps = 1;
  std::uint64_t seed = 0;
  std::vector<Functional> functionals{Functional::spec_err()};
  double taper_alpha = 1.0;  // used by taper_err[auto]
  std::uint64_t subset_guard = kDefaultSubsetGuard;
  std::size_t max_dim = kDefaultMaxDim;
};

struct ExperimentRecord {
  std::size_t n = 0;
  std::size_t d = 0;
  std::string estimator;
  std::string functional;
  std::size_t replicate = 0;
  double value = 0.0;
};

struct ExperimentFailure {
  std::size_t n = 0;
  std::size_t d = 0;
  std::string estimator;
  std::string functional;
  std::size_t replicate = 0;
  std::string reason;
};

/// Replicate statistics for one (n, d, estimator, functional) cell. NaN
/// values from failed evaluations are excluded from every statistic.
struct SummaryRow {
  std::size_t n = 0;
  std::size_t d = 0;
  std::string estimator;
  std::string functional;
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ExperimentRecord> records;
  std::vector<ExperimentFailure> failures;
  std::vector<SummaryRow> summary;

  const SummaryRow* find(std::size_t n, std::size_t d, std::string_view estimator, std::string_view functional) const {
    for (const auto& row : summary)
      if (row.n == n && row.d == d && row.estimator == estimator && row.functional == functional) return &row;
    return nullptr;
  }
};

/// Mean by pairwise summation.
inline double pairwise_mean(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto sum = [](const auto& self, std::span<const double> x) -> double {
    if (x.size() <= 8) {
      double s = 0.0;
      for (double e : x) s += e;
      return s;
    }
    const std::size_t half = x.size() / 2;
    return self(self, x.first(half)) + self(self, x.subspan(half));
  };
  return sum(sum, v) / static_cast<double>(v.size());
}

/// Linear-interpolation quantile of sorted data (the usual "type 7" rule).
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records) {
  using Key = std::tuple<std::size_t, std::size_t, std::string, std::string>;
  std::map<Key, std::size_t> index;
  std::vector<Key> keys;
  std::vector<std::vector<double>> values;
  for (const auto& r : records) {
    Key key{r.n, r.d, r.estimator, r.functional};
    auto [it, inserted] = index.try_emplace(key, keys.size());
    if (inserted) {
      keys.push_back(key);
      values.emplace_back();
    }
    if (std::isfinite(r.value)) values[it->second].push_back(r.value);
  }
  std::vector<SummaryRow> out;
  out.reserve(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto& v = values[i];
    SummaryRow row{std::get<0>(keys[i]), std::get<1>(keys[i]), std::get<2>(keys[i]), std::get<3>(keys[i]), v.size()};
    row.mean = pairwise_mean(v);
    if (v.size() >= 2) {
      std::vector<double> dev(v.size());
      for (std::size_t j = 0; j < v.size(); ++j) dev[j] = (v[j] - row.mean) * (v[j] - row.mean);
      row.sd = std::sqrt(pairwise_mean(dev) * static_cast<double>(v.size()) / static_cast<double>(v.size() - 1));
    } else {
      row.sd = v.empty() ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    }
    std::sort(v.begin(), v.end());
    row.q05 = quantile_sorted(v, 0.05);
    row.q50 = quantile_sorted(v, 0.50);
    row.q95 = quantile_sorted(v, 0.95);
    out.push_back(std::move(row));
  }
  return out;
}

namespace detail {

inline void validate_config(const ExperimentConfig& cfg) {
  require(cfg.reps >= 1, "experiment: reps must be at least 1");
  require(!cfg.n_grid.empty() && !cfg.d_grid.empty(), "experiment: n_grid and d_grid must be nonempty");
  require(!cfg.estimators.empty(), "experiment: no estimators requested");
  require(!cfg.functionals.empty(), "experiment: no functionals requested");
  require(!cfg.transforms.empty(), "experiment: transform pattern must be nonempty");
  require(cfg.taper_alpha > 0.0, "experiment: taper alpha must be positive");
  const bool ranks = std::any_of(cfg.estimators.begin(), cfg.estimators.end(),
                                 [](Estimator e) { return e != Estimator::Oracle; });
  for (std::size_t n : cfg.n_grid) require(n >= (ranks ? 2u : 1u), "experiment: n must be at least 2 for rank estimators");
  for (std::size_t d : cfg.d_grid) {
    require(d >= 1, "experiment: d must be positive");
    if (d > cfg.max_dim)
      fail(ErrorKind::ResourceGuard, "experiment: d = " + std::to_string(d) + " exceeds the dimension guard " +
                                         std::to_string(cfg.max_dim));
    cfg.model.with_dim(d).validate();
    for (const auto& f : cfg.functionals) {
      switch (f.kind) {
        case FunctionalKind::SparseSpecErr:
        case FunctionalKind::SinAngleSparse:
        case FunctionalKind::SupportHit:
          require(f.param >= 1 && f.param <= d, "experiment: " + f.name() + " needs 1 <= s <= d");
          check_subset_guard(d, f.param, cfg.subset_guard);
          break;
        case FunctionalKind::TaperErr:
          require(f.auto_bandwidth || f.param >= 1, "experiment: taper bandwidth must be positive");
          break;
        case FunctionalKind::ProjDist:
          require(f.param >= 1 && f.param < d, "experiment: " + f.name() + " needs 1 <= k < d");
          break;
        default:
          break;
      }
    }
  }
}

// Population quantities shared by all replicates of one cell.
struct CellContext {
  std::size_t n = 0;
  std::size_t d = 0;
  CorrMatrix sigma;
  SymMatrix tau;
  std::vector<double> leading;  // leading eigenvector of Sigma
  std::map<std::size_t, std::vector<std::size_t>> true_support;
};

inline CellContext make_cell(const ExperimentConfig& cfg, std::size_t n, std::size_t d) {
  CellContext cell;
  cell.n = n;
  cell.d = d;
  const SigmaModel model = cfg.model.with_dim(d);
  cell.sigma = realize_sigma(model);
  cell.tau = tau_pop(cell.sigma);
  cell.leading = model.family == SigmaFamily::Spiked ? spiked_direction(model) : eig_sym(cell.sigma).vector(0);
  for (const auto& f : cfg.functionals)
    if (f.kind == FunctionalKind::SupportHit && !cell.true_support.count(f.param))
      cell.true_support[f.param] = sparse_pca(cell.sigma, f.param, cfg.subset_guard).support;
  return cell;
}

}  // namespace detail

/// Runs every (cell, replicate, estimator, functional) combination. Records
/// are ordered by n, then d, replicate, estimator and functional as listed in
/// the config. A functional that cannot be evaluated records NaN and an
/// entry in `failures`; invalid configurations throw before any work starts.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  detail::validate_config(cfg);
  const std::size_t n_d = cfg.d_grid.size();
  const std::size_t cells = cfg.n_grid.size() * n_d;
  const std::size_t n_est = cfg.estimators.size();
  const std::size_t n_fun = cfg.functionals.size();
  const std::size_t per_task = n_est * n_fun;

  std::vector<detail::CellContext> contexts;
  contexts.reserve(cells);
  for (std::size_t c = 0; c < cells; ++c) contexts.push_back(detail::make_cell(cfg, cfg.n_grid[c / n_d], cfg.d_grid[c % n_d]));

  ExperimentResult result;
  result.config = cfg;
  result.records.resize(cells * cfg.reps * per_task);
  std::vector<std::vector<ExperimentFailure>> task_failures(cells * cfg.reps);

  parallel_for(cells * cfg.reps, [&](std::size_t task) {
    const std::size_t cell_index = task / cfg.reps;
    const std::size_t rep = task % cfg.reps;
    const auto& cell = contexts[cell_index];
    auto& failures = task_failures[task];
    ExperimentRecord* slots = result.records.data() + task * per_task;
    for (std::size_t e = 0; e < n_est; ++e)
      for (std::size_t f = 0; f < n_fun; ++f)
        slots[e * n_fun + f] = {cell.n, cell.d, estimator_name(cfg.estimators[e]), cfg.functionals[f].name(), rep,
                                std::numeric_limits<double>::quiet_NaN()};
    const auto record_failure = [&](std::size_t e, std::size_t f, const std::string& why) {
      failures.push_back({cell.n, cell.d, estimator_name(cfg.estimators[e]), cfg.functionals[f].name(), rep, why});
    };

    std::optional<DataMatrix> x;
    std::optional<ColumnRanks> ranks;
    try {
      x = sample_latent(cell.sigma, cell.n, derive_seed(cfg.seed, cell_index, rep));
      const DataMatrix y = apply_transforms(*x, TransformSet::cycle(cell.d, cfg.transforms));
      if (std::any_of(cfg.estimators.begin(), cfg.estimators.end(), [](Estimator est) { return est != Estimator::Oracle; }))
        ranks = column_ranks(y);
    } catch (const Error& err) {
      for (std::size_t e = 0; e < n_est; ++e)
        for (std::size_t f = 0; f < n_fun; ++f) record_failure(e, f, err.what());
      return;
    }

    std::optional<double> delta0_norm;
    for (std::size_t e = 0; e < n_est; ++e) {
      const Estimator est = cfg.estimators[e];
      std::optional<RankStatMatrix> kendall;
      SymMatrix hat;
      try {
        switch (est) {
          case Estimator::Tau:
            kendall = kendall_tau_matrix(*ranks);
            hat = sigma_hat_tau(*kendall).sym();
            break;
          case Estimator::Rho:
            hat = sigma_hat_rho(spearman_rho_matrix(*ranks)).sym();
            break;
          case Estimator::Oracle:
            hat = oracle_sample_corr(*x);
            break;
        }
      } catch (const Error& err) {
        for (std::size_t f = 0; f < n_fun; ++f) record_failure(e, f, err.what());
        continue;
      }
      const SymMatrix diff = hat - cell.sigma.sym();
      std::map<std::size_t, SparsePCAResult> pca_cache;
      const auto pca = [&](std::size_t s) -> const SparsePCAResult& {
        auto it = pca_cache.find(s);
        if (it == pca_cache.end()) it = pca_cache.emplace(s, sparse_pca(hat, s, cfg.subset_guard)).first;
        return it->second;
      };
      for (std::size_t f = 0; f < n_fun; ++f) {
        const Functional& fun = cfg.functionals[f];
        double value = std::numeric_limits<double>::quiet_NaN();
        try {
          switch (fun.kind) {
            case FunctionalKind::SpecErr:
              value = spectral_norm(diff);
              break;
            case FunctionalKind::MaxErr:
              value = norm_max(diff);
              break;
            case FunctionalKind::SparseSpecErr:
              value = sparse_spectral_norm(diff, fun.param, cfg.subset_guard).value;
              break;
            case FunctionalKind::TaperErr: {
              const std::size_t k = fun.auto_bandwidth ? optimal_bandwidth(cell.n, cell.d, cfg.taper_alpha) : fun.param;
              const double err = spectral_norm(taper_estimate(hat, TaperSpec{k}) - cell.sigma.sym());
              value = err * err;
              break;
            }
            case FunctionalKind::SinAngleSparse:
              value = sin_angle(pca(fun.param).leading_vector, cell.leading);
              break;
            case FunctionalKind::SupportHit:
              value = pca(fun.param).support == cell.true_support.at(fun.param) ? 1.0 : 0.0;
              break;
            case FunctionalKind::ProjDist:
              value = pca_projections_compare(cell.sigma, hat, fun.param);
              break;
            case FunctionalKind::HoeffdingResidual:
              if (est != Estimator::Tau)
                fail(ErrorKind::InvalidInput, "hoeffding_residual is defined for the Kendall estimator only");
              {
                const double r = norm_frobenius(kendall->values - cell.tau - 2.0 * delta1_matrix(*x, cell.sigma));
                value = r * r;
              }
              break;
            case FunctionalKind::Delta0Spec:
              if (!delta0_norm) delta0_norm = spectral_norm(delta0_matrix(*x, cell.sigma));
              value = *delta0_norm;
              break;
          }
        } catch (const Error& err) {
          record_failure(e, f, err.what());
        }
        slots[e * n_fun + f].value = value;
      }
    }
  });

  for (auto& tf : task_failures)
    for (auto& fl : tf) result.failures.push_back(std::move(fl));
  result.summary = summarize(result.records);
  return result;
}

// ---------------------------------------------------------------------------
// Analysis

enum class Axis { N, D };
enum class Statistic { Mean, Median, Q95 };

inline double pick_statistic(const SummaryRow& row, Statistic stat) {
  switch (stat) {
    case Statistic::Mean: return row.mean;
    case Statistic::Median: return row.q50;
    case Statistic::Q95: return row.q95;
  }
  return row.mean;
}

struct RateFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// Least-squares line through (log x, log y).
inline RateFit loglog_fit(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "rate fit: length mismatch");
  if (x.size() < 3) fail(ErrorKind::InvalidInput, "rate fit: need at least 3 grid points, got " + std::to_string(x.size()));
  const std::size_t m = x.size();
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    require(x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i]), "rate fit: values must be positive and finite");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = pairwise_mean(lx), my = pairwise_mean(ly);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  require(sxx > 0.0, "rate fit: the varied axis needs at least two distinct values");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = m;
  double sse = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    sse += r * r;
  }
  fit.stderr_slope = std::sqrt(sse / static_cast<double>(m - 2) / sxx);
  return fit;
}

/// Slope of log(statistic) against log(n) or log(d). When the other axis has
/// several values, `fixed` selects one.
inline RateFit rate_fit(const ExperimentResult& result, std::string_view estimator, std::string_view functional,
                        Axis vary, Statistic stat = Statistic::Mean, std::optional<std::size_t> fixed = std::nullopt) {
  std::vector<std::pair<double, double>> points;
  std::vector<std::size_t> others;
  for (const auto& row : result.summary) {
    if (row.estimator != estimator || row.functional != functional) continue;
    const std::size_t other = vary == Axis::N ? row.d : row.n;
    if (fixed && other != *fixed) continue;
    if (std::find(others.begin(), others.end(), other) == others.end()) others.push_back(other);
    points.emplace_back(static_cast<double>(vary == Axis::N ? row.n : row.d), pick_statistic(row, stat));
  }
  if (others.size() > 1)
    fail(ErrorKind::InvalidInput, std::string("rate fit: several values of ") + (vary == Axis::N ? "d" : "n") +
                                      "; choose one to hold fixed");
  std::sort(points.begin(), points.end());
  std::vector<double> x, y;
  for (const auto& [px, py] : points) {
    x.push_back(px);
    y.push_back(py);
  }
  return loglog_fit(x, y);
}

/// Right-hand sides with constants stripped (except the oracle bound, whose
/// constants are explicit).
struct Bound {
  enum class Kind { Thm1, OracleExplicit, SparseDeviation, Delta0Tail } kind = Kind::Thm1;
  std::size_t s = 1;  // SparseDeviation
  double t = 0.0;     // SparseDeviation, Delta0Tail

  static Bound thm1() { return {Kind::Thm1}; }
  static Bound oracle_explicit() { return {Kind::OracleExplicit}; }
  /// sqrt((s log(e d / s) + t) / n).
  static Bound sparse_deviation(std::size_t s, double t) { return {Kind::SparseDeviation, s, t}; }
  /// 5 ||Sigma||_S (sqrt((d + t^2/pi) / (3n)) + (d + (t^2 + 1)/pi) / n), holding with probability 1 - 2 exp(-t^2).
  static Bound delta0_tail(double t) { return {Kind::Delta0Tail, 1, t}; }

  double rhs(std::size_t n_, std::size_t d_, double sigma_norm) const {
    const double n = static_cast<double>(n_), d = static_cast<double>(d_);
    switch (kind) {
      case Kind::Thm1: return sigma_norm * (std::sqrt(d / n) + d / n);
      case Kind::OracleExplicit:
        return sigma_norm * (2.0 * std::numbers::sqrt2 * std::sqrt(d / n) + std::numbers::sqrt2 * d / n +
                             6.0 * std::pow(d / (n * n * n), 0.25));
      case Kind::SparseDeviation: {
        const double ss = static_cast<double>(s);
        return std::sqrt((ss * std::log(std::numbers::e * d / ss) + t) / n);
      }
      case Kind::Delta0Tail:
        return 5.0 * sigma_norm *
               (std::sqrt((d + t * t / std::numbers::pi) / (3.0 * n)) + (d + (t * t + 1.0) / std::numbers::pi) / n);
    }
    return 0.0;
  }
};

struct BoundRatio {
  double max_ratio = 0.0;
  std::size_t n = 0, d = 0;  // cell attaining the maximum
};

/// max over cells of statistic / rhs. Uses the config's Sigma family for
/// ||Sigma||_S at each d.
inline BoundRatio bound_ratio(const ExperimentResult& result, std::string_view estimator, std::string_view functional,
                              const Bound& bound, Statistic stat = Statistic::Mean) {
  std::map<std::size_t, double> sigma_norm;
  BoundRatio out;
  bool any = false;
  for (const auto& row : result.summary) {
    if (row.estimator != estimator || row.functional != functional) continue;
    auto it = sigma_norm.find(row.d);
    if (it == sigma_norm.end())
      it = sigma_norm.emplace(row.d, spectral_norm(realize_sigma(result.config.model.with_dim(row.d)))).first;
    const double observed = pick_statistic(row, stat);
    const double ratio = observed == 0.0 ? 0.0 : observed / bound.rhs(row.n, row.d, it->second);
    if (!any || ratio > out.max_ratio) out = {ratio, row.n, row.d};
    any = true;
  }
  require(any, "bound_ratio: no summary rows for " + std::string(estimator) + " / " + std::string(functional));
  return out;
}

/// The sample-size condition t + log d <= beta sqrt((n/s)(t + log(e d/s)))
/// under which the sparse PCA rate is stated.
inline bool sparse_pca_regime(std::size_t n, std::size_t d, std::size_t s, double t, double beta = 1.0) {
  const double ss = static_cast<double>(s), dd = static_cast<double>(d);
  return t + std::log(dd) <= beta * std::sqrt(static_cast<double>(n) / ss * (t + std::log(std::numbers::e * dd / ss)));
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_results_csv(std::ostream& out, const ExperimentResult& result) {
  out << "n,d,estimator,functional,replicate,value\n";
  for (const auto& r : result.records)
    out << r.n << ',' << r.d << ',' << r.estimator << ',' << r.functional << ',' << r.replicate << ','
        << format_double(r.value) << '\n';
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary) {
  out << "n,d,estimator,functional,count,mean,sd,q05,q50,q95\n";
  for (const auto& s : summary)
    out << s.n << ',' << s.d << ',' << s.estimator << ',' << s.functional << ',' << s.count << ','
        << format_double(s.mean) << ',' << format_double(s.sd) << ',' << format_double(s.q05) << ','
        << format_double(s.q50) << ',' << format_double(s.q95) << '\n';
}

inline void write_failures_csv(std::ostream& out, const std::vector<ExperimentFailure>& failures) {
  out << "n,d,estimator,functional,replicate,reason\n";
  for (const auto& f : failures) {
    std::string reason = f.reason;
    std::replace(reason.begin(), reason.end(), '"', '\'');
    out << f.n << ',' << f.d << ',' << f.estimator << ',' << f.functional << ',' << f.replicate << ",\"" << reason
        << "\"\n";
  }
}

/// Reads a results CSV written by write_results_csv. The config is left at
/// its defaults; the summary is recomputed.
inline ExperimentResult read_results_csv(std::istream& in) {
  ExperimentResult result;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::InvalidInput, "results csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "n,d,estimator,functional,replicate,value")
    fail(ErrorKind::InvalidInput, "results csv: unexpected header '" + line + "'");
  std::size_t line_no = 1;
  const auto to_size = [&](const std::string& field) {
    if (field.empty() || field.find_first_not_of("0123456789") != std::string::npos)
      fail(ErrorKind::InvalidInput, "results csv line " + std::to_string(line_no) + ": bad integer '" + field + "'");
    return static_cast<std::size_t>(std::stoull(field));
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 6)
      fail(ErrorKind::InvalidInput, "results csv line " + std::to_string(line_no) + ": expected 6 fields");
    ExperimentRecord r{to_size(fields[0]), to_size(fields[1]), fields[2], fields[3], to_size(fields[4])};
    char* end = nullptr;
    r.value = std::strtod(fields[5].c_str(), &end);
    if (fields[5].empty() || *end != '\0')
      fail(ErrorKind::InvalidInput, "results csv line " + std::to_string(line_no) + ": bad value '" + fields[5] + "'");
    result.records.push_back(std::move(r));
  }
  result.summary = summarize(result.records);
  return result;
}

}  // namespace rankcorr
