#include "memv/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "memv/csv.hpp"
#include "memv/errors.hpp"
#include "memv/estimator.hpp"
#include "memv/inference.hpp"
#include "memv/kappa_sweep.hpp"
#include "memv/simulation.hpp"
#include "memv/svg.hpp"
#include "memv/types.hpp"

namespace memv {

namespace {

// All numeric output carries 12 significant digits.
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) {
  return v ? fmt(*v) : std::string("n/a");
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw data_error("cannot write '" + tmp + "'");
    }
    out << content;
    out.flush();
    if (!out) {
      throw data_error("failed while writing '" + tmp + "'");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw data_error("cannot rename '" + tmp + "' to '" + path + "'");
  }
  std::cout << "wrote: " << path << "\n";
}

double parse_double_or(const std::string& raw, const std::string& what) {
  std::string s = raw;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(0, 1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || begin == end) {
    throw data_error("cannot parse '" + raw + "' in " + what);
  }
  return value;
}

Eigen::MatrixXd load_s_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw data_error("cannot open '" + path + "'");
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      row.push_back(parse_double_or(field, "'" + path + "'"));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw data_error("'" + path + "' contains no matrix rows");
  }
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd s(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != m) {
      throw data_error("'" + path + "' is not square: row " +
                       std::to_string(i + 1) + " has " +
                       std::to_string(rows[i].size()) + " of " +
                       std::to_string(m) + " values");
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      s(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return s;
}

std::vector<double> parse_kappa_grid(const std::string& spec) {
  if (spec.empty()) return default_kappa_grid();
  std::vector<double> grid;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() != 3) {
      throw usage_error("--kappa-grid range form is lo:step:hi");
    }
    double lo, step, hi;
    try {
      lo = parse_double_or(parts[0], "--kappa-grid");
      step = parse_double_or(parts[1], "--kappa-grid");
      hi = parse_double_or(parts[2], "--kappa-grid");
    } catch (const data_error& e) {
      throw usage_error(e.what());
    }
    if (!(step > 0.0) || !(lo <= hi)) {
      throw usage_error("--kappa-grid needs step > 0 and lo <= hi");
    }
    for (int i = 0;; ++i) {
      const double v = lo + i * step;
      if (v > hi + step * 1e-9) break;
      grid.push_back(v);
    }
  } else {
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) {
      try {
        grid.push_back(parse_double_or(part, "--kappa-grid"));
      } catch (const data_error& e) {
        throw usage_error(e.what());
      }
    }
  }
  if (grid.empty()) {
    throw usage_error("--kappa-grid resolved to an empty grid");
  }
  return grid;
}

Dataset load_input(const RunConfig& cfg) {
  if (cfg.input.empty()) {
    throw usage_error(cfg.command + " requires --input");
  }
  if (cfg.response.empty()) {
    throw usage_error(cfg.command + " requires --response");
  }
  if (cfg.covariates.empty()) {
    throw usage_error(cfg.command + " requires --covariates");
  }
  return load_csv(cfg.input, cfg.response, cfg.covariates);
}

Eigen::MatrixXd resolve_s(const RunConfig& cfg, Eigen::Index m,
                          bool allow_default_zero) {
  if (!cfg.kappa_grid_spec.empty()) {
    throw usage_error("--kappa-grid applies only to the sweep command");
  }
  if (!cfg.s_matrix_path.empty() && !cfg.s_stddevs.empty()) {
    throw usage_error("--s-matrix and --s-stddevs are mutually exclusive");
  }
  if (!cfg.s_matrix_path.empty()) {
    Eigen::MatrixXd s = load_s_matrix(cfg.s_matrix_path);
    if (s.rows() != m) {
      throw data_error("error-covariance matrix is " +
                       std::to_string(s.rows()) + "x" +
                       std::to_string(s.cols()) + " but the model has " +
                       std::to_string(m) + " covariates");
    }
    return s;
  }
  if (!cfg.s_stddevs.empty()) {
    if (static_cast<Eigen::Index>(cfg.s_stddevs.size()) != m) {
      throw usage_error("--s-stddevs needs exactly one value per covariate");
    }
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double tau = cfg.s_stddevs[static_cast<std::size_t>(j)];
      if (!std::isfinite(tau) || tau < 0.0) {
        throw usage_error("--s-stddevs values must be finite and nonnegative");
      }
      s(j, j) = tau * tau;
    }
    return s;
  }
  if (allow_default_zero) {
    return Eigen::MatrixXd::Zero(m, m);
  }
  throw usage_error(cfg.command +
                    " requires an error-covariance source: --s-matrix or "
                    "--s-stddevs");
}

double resolve_z(const RunConfig& cfg) {
  if (cfg.z_alpha && cfg.alpha) {
    throw usage_error("--z-alpha and --alpha are mutually exclusive");
  }
  if (cfg.alpha) {
    if (!(*cfg.alpha > 0.0 && *cfg.alpha < 0.5)) {
      throw usage_error("--alpha must lie in (0, 0.5)");
    }
    return normal_quantile(1.0 - *cfg.alpha);
  }
  if (cfg.z_alpha) {
    if (!std::isfinite(*cfg.z_alpha) || *cfg.z_alpha <= 0.0) {
      throw usage_error("--z-alpha must be positive and finite");
    }
    return *cfg.z_alpha;
  }
  return 3.0;
}

double response_std(const Dataset& d) {
  if (d.n() < 2) {
    throw data_error("--sigma0-rel requires at least two observations");
  }
  const double mean = d.y().mean();
  const double ss = (d.y().array() - mean).square().sum();
  return std::sqrt(ss / static_cast<double>(d.n() - 1));
}

double resolve_sigma0(const RunConfig& cfg, const Dataset& d,
                      std::string* note) {
  if (cfg.sigma0 && cfg.sigma0_rel) {
    throw usage_error("--sigma0 and --sigma0-rel are mutually exclusive");
  }
  if (!cfg.sigma0 && !cfg.sigma0_rel) {
    throw usage_error(cfg.command + " requires --sigma0 or --sigma0-rel");
  }
  if (cfg.sigma0) {
    if (!std::isfinite(*cfg.sigma0) || *cfg.sigma0 <= 0.0) {
      throw usage_error("--sigma0 must be positive and finite");
    }
    note->clear();
    return *cfg.sigma0;
  }
  const double rho = *cfg.sigma0_rel;
  if (!std::isfinite(rho) || rho <= 0.0) {
    throw usage_error("--sigma0-rel must be positive and finite");
  }
  const double sd = response_std(d);
  const double sigma0_sq = (rho * sd) * (rho * sd);
  *note = " (from --sigma0-rel " + fmt(rho) + " of response std " + fmt(sd) +
          ")";
  return sigma0_sq;
}

void emit_report(const RunConfig& cfg, const std::string& report) {
  if (cfg.out.empty()) {
    std::cout << report;
  } else {
    write_atomic(cfg.out, report);
  }
}

void run_test(const RunConfig& cfg) {
  const Dataset d = load_input(cfg);
  const Eigen::MatrixXd s = resolve_s(cfg, d.m(), false);
  std::string sigma0_note;
  const double sigma0_sq = resolve_sigma0(cfg, d, &sigma0_note);
  const double z = resolve_z(cfg);
  const ErrorModel em(s, sigma0_sq);

  const TestResult tr = memv_test(d, em, z);
  const double r2 = r_squared(d, tr.theta.c_hat);
  const double suggested = suggest_sigma0(d, tr.theta);

  std::ostringstream rep;
  rep << "command: test\n"
      << "input: " << cfg.input << "\n"
      << "observations: " << d.n() << "\n"
      << "covariates: " << d.m() << " (";
  for (Eigen::Index j = 0; j < d.m(); ++j) {
    rep << (j ? ", " : "") << d.column_names()[static_cast<std::size_t>(j)];
  }
  rep << ")\n"
      << "sigma0_sq: " << fmt(em.sigma0_sq()) << sigma0_note << "\n"
      << "z_alpha: " << fmt(tr.z_alpha)
      << " (alpha = " << fmt(normal_cdf(-tr.z_alpha)) << ")\n"
      << "c_hat:\n";
  for (Eigen::Index j = 0; j < d.m(); ++j) {
    rep << "  " << d.column_names()[static_cast<std::size_t>(j)] << " = "
        << fmt(tr.theta.c_hat(j)) << "\n";
  }
  rep << "rss: " << fmt(tr.theta.rss) << "\n"
      << "r_squared: " << fmt(r2) << "\n"
      << "sigma_tilde_sq: " << fmt(tr.theta.sigma_tilde_sq) << "\n"
      << "sigma_hat_sq: " << fmt(tr.theta.sigma_hat_sq);
  if (tr.theta.sigma_tilde_sq < 0.0) {
    rep << " (clamped from negative sigma_tilde_sq; sandwich se decides)";
  }
  rep << "\n"
      << "se_hat: " << fmt(tr.se_hat) << " (bracket " << fmt(tr.se_bracket)
      << ", sandwich " << fmt(tr.se_sandwich) << ")\n"
      << "t_stat: " << fmt(tr.t_stat) << "\n"
      << "p_value: " << fmt(tr.p_value) << "\n"
      << "decision: "
      << (tr.reject ? "reject H0 (response-error variance exceeds sigma0_sq)"
                    : "do not reject H0")
      << "\n"
      << "pseudo_inverse_truncated: "
      << (tr.theta.gram_singular ? "yes" : "no") << "\n"
      << "suggested_sigma0_sq: " << fmt(suggested)
      << " (residual variance rss / (n - m))\n";
  emit_report(cfg, rep.str());
}

void run_suggest(const RunConfig& cfg) {
  const Dataset d = load_input(cfg);
  const Eigen::MatrixXd s = resolve_s(cfg, d.m(), true);
  const ErrorModel em(s, 0.0);
  const ThetaEstimate theta = als_estimate(d, em);
  const double suggested = suggest_sigma0(d, theta);

  std::ostringstream rep;
  rep << "command: suggest\n"
      << "input: " << cfg.input << "\n"
      << "observations: " << d.n() << "\n"
      << "covariates: " << d.m() << "\n"
      << "rss: " << fmt(theta.rss) << "\n"
      << "suggested_sigma0_sq: " << fmt(suggested)
      << " (residual variance rss / (n - m))\n"
      << "suggested_sigma0: " << fmt(std::sqrt(suggested)) << "\n";
  emit_report(cfg, rep.str());
}

void run_sweep(const RunConfig& cfg) {
  if (!cfg.s_matrix_path.empty() || !cfg.s_stddevs.empty()) {
    throw usage_error(
        "sweep derives S from the kappa grid; --s-matrix and --s-stddevs do "
        "not apply");
  }
  if (cfg.out.empty()) {
    throw usage_error("sweep requires --out (base path for .csv and .svg)");
  }
  const Dataset d = load_input(cfg);
  std::string sigma0_note;
  const double sigma0_sq = resolve_sigma0(cfg, d, &sigma0_note);
  const double z = resolve_z(cfg);
  const std::vector<double> grid = parse_kappa_grid(cfg.kappa_grid_spec);

  const SweepCurve curve = sweep(d, sigma0_sq, grid, z);

  std::ostringstream csv;
  csv << "kappa,p_value,T,A_n,reject,degenerate\n";
  for (const SweepPoint& pt : curve.points) {
    csv << fmt(pt.kappa) << ',' << fmt(pt.test.p_value) << ','
        << fmt(pt.test.t_stat) << ',' << fmt(pt.a_n) << ','
        << (pt.test.reject ? 1 : 0) << ',' << (pt.degenerate ? 1 : 0) << "\n";
  }
  write_atomic(cfg.out + ".csv", csv.str());
  write_atomic(cfg.out + ".svg", sweep_svg(curve));

  std::ostringstream sum;
  sum << "sweep: " << curve.points.size()
      << " grid points, sigma0_sq = " << fmt(sigma0_sq) << sigma0_note
      << ", alpha = " << fmt(curve.alpha) << "\n";
  auto show = [&sum](const char* label,
                     const std::vector<KappaInterval>& intervals) {
    sum << label << ":";
    if (intervals.empty()) sum << " none";
    for (const KappaInterval& iv : intervals) {
      sum << " [" << fmt(iv.lo) << ", " << fmt(iv.hi) << "]";
    }
    sum << "\n";
  };
  show("reject intervals", curve.reject_intervals);
  show("accept intervals", curve.accept_intervals);
  long degenerate = 0;
  for (const SweepPoint& pt : curve.points) degenerate += pt.degenerate;
  sum << "degenerate points: " << degenerate << "\n";
  std::cout << sum.str();
}

const char* stratum_label(int s) {
  switch (static_cast<Stratum>(s)) {
    case Stratum::kAll:
      return "all";
    case Stratum::kInclusion:
      return "inclusion";
    case Stratum::kNoInclusionH0True:
      return "no_inclusion_h0_true";
    case Stratum::kNoInclusionH0False:
      return "no_inclusion_h0_false";
  }
  return "unknown";
}

void run_simulate(const RunConfig& cfg) {
  if (cfg.out.empty()) {
    throw usage_error("simulate requires --out (output directory)");
  }
  GridSpec spec;
  if (!cfg.sizes.empty()) spec.sizes = cfg.sizes;
  if (!cfg.x_error_factors.empty()) spec.x_error_factors = cfg.x_error_factors;
  if (!cfg.y_error_factors.empty()) spec.y_error_factors = cfg.y_error_factors;
  if (!cfg.pa_levels.empty()) spec.pa_levels = cfg.pa_levels;
  if (!cfg.f_factors.empty()) spec.f_factors = cfg.f_factors;
  spec.replications = cfg.replications;
  if (!cfg.c_true.empty()) {
    if (cfg.c_true.size() != 2) {
      throw usage_error("--c-true needs exactly two values");
    }
    spec.c_true = Eigen::Vector2d(cfg.c_true[0], cfg.c_true[1]);
  }
  spec.x3_coeff = cfg.x3_coeff;

  const GridResult res = run_grid(spec, cfg.seed, cfg.threads);

  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) {
    throw data_error("cannot create directory '" + cfg.out +
                     "': " + ec.message());
  }
  const std::filesystem::path dir(cfg.out);

  std::ostringstream cells;
  cells << "n,x_error_factor,y_error_factor,pa_level,inclusion,f,"
           "replications,rejection_rate,type1_rate,type2_rate,mean_r2,"
           "mean_p\n";
  for (const CellSummary& c : res.cells) {
    cells << c.cfg.n << ',' << fmt(c.cfg.x_error_factor) << ','
          << fmt(c.cfg.y_error_factor) << ',' << fmt(c.cfg.pa_level) << ','
          << (c.cfg.inclusion ? 1 : 0) << ',' << fmt(c.cfg.f) << ','
          << c.cfg.replications << ',' << fmt(c.rejection_rate) << ','
          << fmt(c.type1_rate) << ',' << fmt(c.type2_rate) << ','
          << fmt(c.mean_r2) << ',' << fmt(c.mean_p) << "\n";
  }
  write_atomic((dir / "cells.csv").string(), cells.str());

  std::ostringstream t1;
  t1 << "n,stratum,count,rejection_rate,type2_rate,mean_r2,mean_p,"
        "corr_p_reject,corr_p_r2,corr_p_type2\n";
  for (const SizeSummary& ss : res.by_size) {
    for (int s = 0; s < 4; ++s) {
      const StratumStats& st = ss.strata[static_cast<std::size_t>(s)];
      t1 << ss.n << ',' << stratum_label(s) << ',' << st.count << ','
         << fmt(st.rejection_rate) << ',' << fmt(st.type2_rate) << ','
         << fmt(st.mean_r2) << ',' << fmt(st.mean_p) << ','
         << fmt(st.corr_p_reject) << ',' << fmt(st.corr_p_r2) << ','
         << fmt(st.corr_p_type2) << "\n";
    }
  }
  write_atomic((dir / "table1.csv").string(), t1.str());

  std::ostringstream t2;
  t2 << "factor,level,count,rejection_rate,type2_rate,mean_r2,mean_p\n";
  auto levels = [&t2](const char* name, const std::vector<LevelStats>& ls) {
    for (const LevelStats& l : ls) {
      t2 << name << ',' << fmt(l.level) << ',' << l.count << ','
         << fmt(l.rejection_rate) << ',' << fmt(l.type2_rate) << ','
         << fmt(l.mean_r2) << ',' << fmt(l.mean_p) << "\n";
    }
  };
  levels("y_error_factor", res.by_y_error);
  levels("x_error_factor", res.by_x_error);
  levels("f", res.by_f);
  write_atomic((dir / "table2.csv").string(), t2.str());

  std::cout << "simulate: " << res.cells.size() << " cells, "
            << res.cells.size() * static_cast<std::size_t>(spec.replications)
            << " datasets (seed " << cfg.seed << ")\n";
}

}  // namespace

void run(const RunConfig& cfg) {
  if (cfg.command == "test") {
    run_test(cfg);
  } else if (cfg.command == "sweep") {
    run_sweep(cfg);
  } else if (cfg.command == "simulate") {
    run_simulate(cfg);
  } else if (cfg.command == "suggest") {
    run_suggest(cfg);
  } else {
    throw usage_error("unknown command '" + cfg.command +
                      "'; expected test, sweep, simulate, or suggest");
  }
}

int cli_main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{
      "memv: validity testing for linear regression with "
      "errors-in-variables"};
  app.set_config("--config", "",
                 "flat key=value config file; command-line flags win");

  app.add_option("command", cfg.command,
                 "one of: test, sweep, simulate, suggest")
      ->required();
  app.add_option("--input", cfg.input, "input CSV with a header row");
  app.add_option("--response", cfg.response, "response column name");
  app.add_option("--covariates", cfg.covariates,
                 "covariate column names (comma separated)")
      ->delimiter(',');
  app.add_option("--s-matrix", cfg.s_matrix_path,
                 "file with the m x m error covariance, one row per line");
  app.add_option("--s-stddevs", cfg.s_stddevs,
                 "per-covariate error standard deviations (diagonal S)")
      ->delimiter(',');
  app.add_option("--kappa-grid", cfg.kappa_grid_spec,
                 "sweep grid, lo:step:hi or comma list (default 0:0.01:0.95)");

  double sigma0 = 0.0, sigma0_rel = 0.0, z_alpha = 0.0, alpha = 0.0;
  CLI::Option* sigma0_opt =
      app.add_option("--sigma0", sigma0, "hypothesized variance bound");
  CLI::Option* sigma0_rel_opt = app.add_option(
      "--sigma0-rel", sigma0_rel,
      "hypothesized error std as a fraction of the response std");
  CLI::Option* z_opt =
      app.add_option("--z-alpha", z_alpha, "critical value (default 3)");
  CLI::Option* alpha_opt =
      app.add_option("--alpha", alpha, "significance level in (0, 0.5)");

  app.add_option("--out", cfg.out,
                 "report path (test/suggest), base path (sweep), or "
                 "directory (simulate)");
  app.add_option("--seed", cfg.seed, "simulation seed");
  app.add_option("--threads", cfg.threads,
                 "simulation worker threads (0 = hardware)");
  app.add_option("--sizes", cfg.sizes, "simulation sample sizes")
      ->delimiter(',');
  app.add_option("--x-error-factors", cfg.x_error_factors,
                 "simulation covariate-error factors")
      ->delimiter(',');
  app.add_option("--y-error-factors", cfg.y_error_factors,
                 "simulation response-error factors")
      ->delimiter(',');
  app.add_option("--pa-levels", cfg.pa_levels,
                 "simulation presumed-to-actual variance levels")
      ->delimiter(',');
  app.add_option("--f-factors", cfg.f_factors,
                 "simulation hidden-covariate range factors")
      ->delimiter(',');
  app.add_option("--replications", cfg.replications,
                 "simulation replications per cell");
  app.add_option("--c-true", cfg.c_true,
                 "simulation true coefficients (two values)")
      ->delimiter(',');
  app.add_option("--x3-coeff", cfg.x3_coeff,
                 "simulation hidden-covariate coefficient");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (sigma0_opt->count() > 0) cfg.sigma0 = sigma0;
  if (sigma0_rel_opt->count() > 0) cfg.sigma0_rel = sigma0_rel;
  if (z_opt->count() > 0) cfg.z_alpha = z_alpha;
  if (alpha_opt->count() > 0) cfg.alpha = alpha;

  try {
    run(cfg);
    return 0;
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const degeneracy_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace memv
