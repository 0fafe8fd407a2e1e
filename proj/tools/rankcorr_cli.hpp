#pragma once

// `rankcorr` command-line tool. Exit codes: 0 ok, 1 assertion or inequality
// failure, 2 input error, 3 resource guard.

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rankcorr/rankcorr.hpp"
#include "rankcorr/presets.hpp"

namespace rankcorr::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kInputError = 2, kResourceGuard = 3 };

inline int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::InvalidInput:
    case ErrorKind::Ties: return kInputError;
    case ErrorKind::ResourceGuard: return kResourceGuard;
    case ErrorKind::Numerical: return kCheckFailed;
  }
  return kCheckFailed;
}

// ---------------------------------------------------------------------------
// CSV matrices

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_number(const std::string& field) {
  const std::string t = trim(field);
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (*end != '\0' || errno == ERANGE) return std::nullopt;
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

/// Numeric n x d matrix; a first row with any non-numeric field is a header.
inline DataMatrix read_matrix_csv(std::istream& in, const std::string& label) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    std::vector<double> row;
    bool numeric = true;
    for (const auto& f : fields) {
      const auto v = parse_number(f);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      fail(ErrorKind::InvalidInput, label + " line " + std::to_string(line_no) + ": non-numeric field");
    }
    first = false;
    for (double v : row)
      if (!std::isfinite(v)) fail(ErrorKind::InvalidInput, label + " line " + std::to_string(line_no) + ": non-finite value");
    if (!rows.empty() && row.size() != rows.front().size())
      fail(ErrorKind::InvalidInput, label + " line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(rows.front().size()) + " fields, found " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorKind::InvalidInput, label + ": no numeric rows");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return DataMatrix::from_matrix(std::move(m));
}

inline DataMatrix read_matrix_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidInput, "cannot open " + path.string());
  return read_matrix_csv(in, path.string());
}

inline void write_matrix_csv(std::ostream& out, const SymMatrix& m) {
  for (std::size_t i = 0; i < m.dim(); ++i) {
    for (std::size_t j = 0; j < m.dim(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::InvalidInput, "cannot write " + path.string());
  writer(out);
  if (!out) fail(ErrorKind::InvalidInput, "error writing " + path.string());
}

/// out.csv + "_tau" -> out_tau.csv
inline fs::path with_suffix(const fs::path& base, const std::string& suffix) {
  fs::path p = base;
  const std::string ext = base.has_extension() ? base.extension().string() : std::string(".csv");
  p.replace_filename(base.stem().string() + suffix + ext);
  return p;
}

// ---------------------------------------------------------------------------
// Subcommands

struct EstimateArgs {
  std::string input;
  std::string method = "tau";
  std::string output;
  std::optional<std::size_t> taper_k;
  std::optional<std::size_t> sparse_s;
};

inline int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
  const DataMatrix y = read_matrix_csv(a.input);
  const auto ranks = column_ranks(y);
  std::vector<std::pair<std::string, CorrMatrix>> estimates;
  if (a.method == "tau" || a.method == "both") estimates.emplace_back("tau", sigma_hat_tau(kendall_tau_matrix(ranks)));
  if (a.method == "rho" || a.method == "both") estimates.emplace_back("rho", sigma_hat_rho(spearman_rho_matrix(ranks)));
  if (a.sparse_s) check_subset_guard(y.d(), *a.sparse_s, kDefaultSubsetGuard);
  for (const auto& [name, sigma_hat] : estimates) {
    const fs::path base = a.method == "both" ? with_suffix(a.output, "_" + name) : fs::path(a.output);
    write_file(base, [&](std::ostream& o) { write_matrix_csv(o, sigma_hat); });
    out << "wrote " << base.string() << '\n';
    if (a.taper_k) {
      const fs::path p = with_suffix(base, "_taper");
      const SymMatrix tapered = taper_estimate(sigma_hat, TaperSpec{*a.taper_k});
      write_file(p, [&](std::ostream& o) { write_matrix_csv(o, tapered); });
      out << "wrote " << p.string() << " (taper k=" << *a.taper_k << ")\n";
    }
    if (a.sparse_s) {
      const auto pca = sparse_pca(sigma_hat, *a.sparse_s);
      const fs::path p = with_suffix(base, "_sparse_pca");
      write_file(p, [&](std::ostream& o) {
        o << "index,in_support,loading\n";
        for (std::size_t j = 0; j < pca.leading_vector.size(); ++j) {
          const bool in = std::find(pca.support.begin(), pca.support.end(), j) != pca.support.end();
          o << j << ',' << (in ? 1 : 0) << ',' << format_double(pca.leading_vector[j]) << '\n';
        }
      });
      out << name << " sparse PCA (s=" << *a.sparse_s << "): leading value " << format_double(pca.leading_value)
          << ", support {";
      for (std::size_t i = 0; i < pca.support.size(); ++i) out << (i ? "," : "") << pca.support[i];
      out << "}\nwrote " << p.string() << '\n';
    }
  }
  return kOk;
}

struct StudyArgs {
  std::string preset;
  std::uint64_t seed = kDefaultStudySeed;
  std::optional<std::size_t> reps;
  std::string out_dir = ".";
  std::vector<std::size_t> n_grid;
  std::vector<std::size_t> d_grid;
  double alpha = 1.0;
  bool assert_gates = false;
};

inline int cmd_study(const StudyArgs& a, std::ostream& out) {
  Preset preset = make_preset(a.preset, a.alpha);
  auto& cfg = preset.config;
  cfg.seed = a.seed;
  if (a.reps) cfg.reps = *a.reps;
  if (!a.n_grid.empty()) cfg.n_grid = a.n_grid;
  if (!a.d_grid.empty()) cfg.d_grid = a.d_grid;
  const ExperimentResult result = run_experiment(cfg);
  const auto analysis = analyze_preset(preset.name, result);

  const fs::path dir(a.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::InvalidInput, "cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "results.csv", [&](std::ostream& o) { write_results_csv(o, result); });
  write_file(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, result.summary); });
  write_file(dir / "analysis.csv", [&](std::ostream& o) { write_analysis_csv(o, analysis); });
  const fs::path failures = dir / "failures.csv";
  if (result.failures.empty()) {
    fs::remove(failures, ec);
  } else {
    write_file(failures, [&](std::ostream& o) { write_failures_csv(o, result.failures); });
  }

  out << preset.name << ": " << cfg.model.describe() << ", " << result.records.size() << " records, "
      << result.failures.size() << " failures, written to " << dir.string() << '\n';
  bool all_pass = true;
  for (const auto& line : analysis) {
    out << "  " << line.name << " = " << format_double(line.value);
    if (line.pass) {
      out << "  [" << (*line.pass ? "pass" : "FAIL") << ": " << line.criterion << "]";
      all_pass = all_pass && *line.pass;
    }
    out << '\n';
  }
  return a.assert_gates && !all_pass ? kCheckFailed : kOk;
}

inline int cmd_kernel_check(std::size_t grid_size, const std::string& path, std::ostream& out) {
  SweepOptions opt;
  opt.grid_size = grid_size;
  const auto report = inequality_sweep(opt);
  write_file(path, [&](std::ostream& o) { write_sweep_csv(o, report); });
  for (const auto& c : report.checks)
    out << c.id << ": worst slack " << format_double(c.worst_slack) << ", tightest lhs/rhs "
        << format_double(c.max_ratio) << " over " << c.evaluations << " points\n";
  const bool ok = report.all_hold(1e-9);
  out << (ok ? "all inequalities hold" : "inequality violated") << "; wrote " << path << '\n';
  return ok ? kOk : kCheckFailed;
}

struct RateFitArgs {
  std::string input;
  std::string functional;
  std::string vary;
  std::string estimator;
  std::string stat = "mean";
  std::optional<std::size_t> fixed;
};

inline int cmd_rate_fit(const RateFitArgs& a, std::ostream& out) {
  std::ifstream in(a.input);
  if (!in) fail(ErrorKind::InvalidInput, "cannot open " + a.input);
  const ExperimentResult result = read_results_csv(in);
  Functional::parse(a.functional);
  std::string estimator = a.estimator;
  if (estimator.empty()) {
    for (const auto& r : result.records) {
      if (r.functional != a.functional) continue;
      if (estimator.empty()) estimator = r.estimator;
      else if (estimator != r.estimator)
        fail(ErrorKind::InvalidInput, "several estimators in " + a.input + "; pass --estimator");
    }
    if (estimator.empty()) fail(ErrorKind::InvalidInput, "no records for functional " + a.functional);
  }
  const Statistic stat = a.stat == "median" ? Statistic::Median : a.stat == "q95" ? Statistic::Q95 : Statistic::Mean;
  const auto fit = rate_fit(result, estimator, a.functional, a.vary == "n" ? Axis::N : Axis::D, stat, a.fixed);
  out << estimator << ' ' << a.functional << " (" << a.stat << ") vs " << a.vary << ": slope "
      << format_double(fit.slope) << " +- " << format_double(fit.stderr_slope) << " over " << fit.points
      << " points\n";
  return kOk;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Rank-based latent correlation estimation and Monte Carlo studies", "rankcorr"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::size_t> threads;
  app.add_option("--threads", threads, "Worker thread cap (output does not depend on it)")
      ->envname("RANKSPEC_THREADS")
      ->check(CLI::PositiveNumber);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate the latent correlation matrix of a CSV data set");
  estimate->add_option("--input", est.input, "n x d numeric CSV, optional header row")->required();
  estimate->add_option("--method", est.method, "tau, rho or both")->check(CLI::IsMember({"tau", "rho", "both"}));
  estimate->add_option("--output", est.output, "Output CSV (both: <stem>_tau / <stem>_rho)")->required();
  estimate->add_option("--taper-k", est.taper_k, "Also write the tapered estimate with this bandwidth")
      ->check(CLI::PositiveNumber);
  estimate->add_option("--sparse-pca-s", est.sparse_s, "Also report the s-sparse leading eigenvector")
      ->check(CLI::PositiveNumber);

  StudyArgs study;
  std::string preset_text;
  const auto add_study = [&](const char* name, const char* help, const char* default_preset) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--preset", preset_text, "thm1 .. thm5")
        ->default_str(default_preset)
        ->check(CLI::IsMember(preset_names()));
    sub->add_option("--seed", study.seed, "Master seed");
    sub->add_option("--reps", study.reps, "Replicates per cell")->check(CLI::PositiveNumber);
    sub->add_option("--out-dir", study.out_dir, "Directory for results.csv, summary.csv, analysis.csv");
    sub->add_option("--n-grid", study.n_grid, "Comma-separated sample sizes")->delimiter(',');
    sub->add_option("--d-grid", study.d_grid, "Comma-separated dimensions")->delimiter(',');
    sub->add_option("--alpha", study.alpha, "Bandable decay exponent (thm3)")->check(CLI::PositiveNumber);
    sub->add_flag("--assert", study.assert_gates, "Exit 1 when an analysis gate fails");
    return sub;
  };
  auto* simulate = add_study("simulate", "Run a preset Monte Carlo study", "thm1");
  auto* taper = add_study("taper-study", "Tapering study (default preset thm3)", "thm3");
  auto* pca = add_study("pca-study", "Sparse PCA study (default preset thm5)", "thm5");

  std::size_t grid_size = 51;
  std::string kernel_out;
  auto* kernel = app.add_subcommand("kernel-check", "Evaluate the kernel inequalities on grids");
  kernel->add_option("--grid-size", grid_size, "Points per axis on [-4, 4]")->check(CLI::Range(2, 10000));
  kernel->add_option("--out", kernel_out, "Report CSV")->required();

  RateFitArgs fit;
  auto* rate = app.add_subcommand("rate-fit", "Log-log slope from a results CSV");
  rate->add_option("--input", fit.input, "results.csv from a study")->required();
  rate->add_option("--functional", fit.functional, "Functional name, e.g. spec_err")->required();
  rate->add_option("--vary", fit.vary, "Axis to vary")->required()->check(CLI::IsMember({"n", "d"}));
  rate->add_option("--estimator", fit.estimator, "tau, rho or oracle (needed when several are present)");
  rate->add_option("--stat", fit.stat, "mean, median or q95")->check(CLI::IsMember({"mean", "median", "q95"}));
  rate->add_option("--fixed", fit.fixed, "Value of the other axis to hold fixed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  set_thread_count(threads.value_or(0));
  try {
    if (*estimate) return cmd_estimate(est, out);
    for (auto* sub : {simulate, taper, pca})
      if (*sub) {
        study.preset = preset_text.empty() ? sub->get_option("--preset")->get_default_str() : preset_text;
        return cmd_study(study, out);
      }
    if (*kernel) return cmd_kernel_check(grid_size, kernel_out, out);
    if (*rate) return cmd_rate_fit(fit, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace rankcorr::cli
