#include "memv/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "memv/errors.hpp"
#include "memv/estimator.hpp"
#include "memv/inference.hpp"
#include "memv/rng.hpp"

namespace memv {

namespace {

std::uint64_t fold(std::uint64_t key, double v) {
  return mix_key(key, std::bit_cast<std::uint64_t>(v));
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Pearson correlation; absent for fewer than two pairs or a constant input.
std::optional<double> pearson(const std::vector<double>& x,
                              const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

StratumStats make_stratum_stats(const std::vector<const RepRecord*>& reps) {
  StratumStats st;
  st.count = static_cast<long>(reps.size());
  if (reps.empty()) return st;

  std::vector<double> p, rej, r2, p_false, t2;
  p.reserve(reps.size());
  rej.reserve(reps.size());
  r2.reserve(reps.size());
  for (const RepRecord* r : reps) {
    p.push_back(r->p_value);
    rej.push_back(r->rejected ? 1.0 : 0.0);
    r2.push_back(r->r2);
    if (!r->h0_true) {
      p_false.push_back(r->p_value);
      t2.push_back(r->rejected ? 0.0 : 1.0);
    }
  }
  st.rejection_rate = mean_of(rej);
  st.mean_r2 = mean_of(r2);
  st.mean_p = mean_of(p);
  if (!t2.empty()) st.type2_rate = mean_of(t2);
  st.corr_p_reject = pearson(p, rej);
  st.corr_p_r2 = pearson(p, r2);
  st.corr_p_type2 = pearson(p_false, t2);
  return st;
}

}  // namespace

void SimConfig::validate() const {
  if (n < 4) {
    throw usage_error("simulation requires n >= 4");
  }
  if (!std::isfinite(x_error_factor) || x_error_factor < 0.0 ||
      !std::isfinite(y_error_factor) || y_error_factor < 0.0) {
    throw usage_error("error factors must be finite and nonnegative");
  }
  if (!std::isfinite(pa_level) || pa_level <= 0.0) {
    throw usage_error("pa_level must be positive");
  }
  if (!std::isfinite(f) || f <= 0.0) {
    throw usage_error("hidden-covariate factor f must be positive");
  }
  if (replications < 1) {
    throw usage_error("replications must be at least 1");
  }
  if (!c_true.allFinite() || !std::isfinite(x3_coeff)) {
    throw usage_error("true coefficients must be finite");
  }
}

std::uint64_t SimConfig::cell_key() const {
  std::uint64_t k = 0x9a3c5e17d24b80f1ULL;
  k = mix_key(k, static_cast<std::uint64_t>(n));
  k = fold(k, x_error_factor);
  k = fold(k, y_error_factor);
  k = fold(k, pa_level);
  k = mix_key(k, inclusion ? 1u : 0u);
  k = fold(k, f);
  k = fold(k, c_true(0));
  k = fold(k, c_true(1));
  k = fold(k, x3_coeff);
  return k;
}

std::pair<Dataset, SimTruth> generate_dataset(const SimConfig& cfg,
                                              int replication_index) {
  cfg.validate();
  if (replication_index < 0) {
    throw usage_error("replication index must be nonnegative");
  }

  Rng rng(mix_key(mix_key(cfg.seed, cfg.cell_key()),
                  static_cast<std::uint64_t>(replication_index)));
  const int n = cfg.n;

  SimTruth truth;
  truth.c_true = cfg.c_true;
  truth.x.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    truth.x(i, 0) = rng.uniform(0.0, 1.5);
    truth.x(i, 1) = rng.uniform(0.0, 0.3);
  }
  if (cfg.inclusion) {
    Eigen::VectorXd x3(n);
    for (int i = 0; i < n; ++i) x3(i) = rng.uniform(0.0, 0.45 * cfg.f);
    truth.x3 = std::move(x3);
  }

  const double sd1 = 0.75 * cfg.x_error_factor;
  const double sd2 = 0.15 * cfg.x_error_factor;
  truth.delta.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    truth.delta(i, 0) = rng.normal(0.0, sd1);
    truth.delta(i, 1) = rng.normal(0.0, sd2);
  }
  truth.s_true = Eigen::Vector2d(sd1 * sd1, sd2 * sd2).asDiagonal();

  // The response-error scale depends on the noiseless response, so y0 is
  // fixed before e is drawn.
  Eigen::VectorXd y0(n);
  for (int i = 0; i < n; ++i) {
    double v = cfg.c_true(0) * truth.x(i, 0) + cfg.c_true(1) * truth.x(i, 1);
    if (truth.x3) v += cfg.x3_coeff * (*truth.x3)(i);
    y0(i) = v;
  }
  double mean_y0 = 0.0;
  for (int i = 0; i < n; ++i) mean_y0 += y0(i);
  mean_y0 /= static_cast<double>(n);

  const double sd_e = std::abs(cfg.y_error_factor * mean_y0);
  truth.e.resize(n);
  for (int i = 0; i < n; ++i) truth.e(i) = rng.normal(0.0, sd_e);
  truth.sigma_sq_true = sd_e * sd_e;
  truth.sigma0_sq =
      cfg.pa_level * rng.uniform(0.8, 1.2) * truth.sigma_sq_true;

  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = y0(i) + truth.e(i);
  Eigen::MatrixXd w = truth.x + truth.delta;
  Dataset data(std::move(y), std::move(w), {"w1", "w2"});
  return {std::move(data), std::move(truth)};
}

CellSummary run_cell(const SimConfig& cfg) {
  cfg.validate();
  CellSummary out;
  out.cfg = cfg;
  out.reps.reserve(static_cast<std::size_t>(cfg.replications));

  double sum_rej = 0.0, sum_r2 = 0.0, sum_p = 0.0;
  bool all_true = true, all_false = true;
  for (int rep = 0; rep < cfg.replications; ++rep) {
    auto [data, truth] = generate_dataset(cfg, rep);
    const ErrorModel em(truth.s_true, truth.sigma0_sq);
    const TestResult tr = memv_test(data, em, 3.0);

    RepRecord rec;
    rec.rejected = tr.reject;
    rec.h0_true = !cfg.inclusion && truth.sigma_sq_true <= truth.sigma0_sq;
    rec.p_value = tr.p_value;
    rec.r2 = r_squared(data, tr.theta.c_hat);
    rec.sigma_sq_true = truth.sigma_sq_true;
    rec.sigma0_sq = truth.sigma0_sq;
    out.reps.push_back(rec);

    sum_rej += rec.rejected ? 1.0 : 0.0;
    sum_r2 += rec.r2;
    sum_p += rec.p_value;
    all_true = all_true && rec.h0_true;
    all_false = all_false && !rec.h0_true;
  }
  const double reps = static_cast<double>(cfg.replications);
  out.rejection_rate = sum_rej / reps;
  out.mean_r2 = sum_r2 / reps;
  out.mean_p = sum_p / reps;
  if (all_true) out.type1_rate = out.rejection_rate;
  if (all_false) out.type2_rate = 1.0 - out.rejection_rate;
  return out;
}

void GridSpec::validate() const {
  if (sizes.empty() || x_error_factors.empty() || y_error_factors.empty() ||
      pa_levels.empty() || f_factors.empty()) {
    throw usage_error("grid factor lists must not be empty");
  }
  for (int n : sizes) {
    if (n < 4) throw usage_error("grid sizes must be at least 4");
  }
  for (double v : x_error_factors) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw usage_error("x error factors must be positive");
    }
  }
  for (double v : y_error_factors) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw usage_error("y error factors must be positive");
    }
  }
  for (double v : pa_levels) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw usage_error("pa levels must be positive");
    }
  }
  for (double v : f_factors) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw usage_error("f factors must be positive");
    }
  }
  if (replications < 1) {
    throw usage_error("replications must be at least 1");
  }
  if (!c_true.allFinite() || !std::isfinite(x3_coeff)) {
    throw usage_error("true coefficients must be finite");
  }
}

GridResult run_grid(const GridSpec& spec, std::uint64_t seed, int threads) {
  spec.validate();

  std::vector<SimConfig> cfgs;
  for (int n : spec.sizes) {
    for (double xf : spec.x_error_factors) {
      for (double yf : spec.y_error_factors) {
        for (double pa : spec.pa_levels) {
          for (int incl = 0; incl < 2; ++incl) {
            for (double f : spec.f_factors) {
              SimConfig c;
              c.n = n;
              c.x_error_factor = xf;
              c.y_error_factor = yf;
              c.pa_level = pa;
              c.inclusion = incl == 1;
              c.f = f;
              c.replications = spec.replications;
              c.seed = seed;
              c.c_true = spec.c_true;
              c.x3_coeff = spec.x3_coeff;
              cfgs.push_back(c);
            }
          }
        }
      }
    }
  }

  GridResult out;
  out.cells.resize(cfgs.size());

  // Cells are written into preallocated slots and aggregated afterwards in
  // grid order, so results do not depend on the thread count.
  std::size_t nthreads =
      threads > 0 ? static_cast<std::size_t>(threads)
                  : std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min(nthreads, cfgs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cfgs.size()) return;
      try {
        out.cells[i] = run_cell(cfgs[i]);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  for (int n : spec.sizes) {
    SizeSummary ss;
    ss.n = n;
    std::array<std::vector<const RepRecord*>, 4> strata;
    for (const CellSummary& cell : out.cells) {
      if (cell.cfg.n != n) continue;
      for (const RepRecord& rec : cell.reps) {
        strata[static_cast<int>(Stratum::kAll)].push_back(&rec);
        if (cell.cfg.inclusion) {
          strata[static_cast<int>(Stratum::kInclusion)].push_back(&rec);
        } else if (rec.h0_true) {
          strata[static_cast<int>(Stratum::kNoInclusionH0True)].push_back(
              &rec);
        } else {
          strata[static_cast<int>(Stratum::kNoInclusionH0False)].push_back(
              &rec);
        }
      }
    }
    for (int s = 0; s < 4; ++s) ss.strata[s] = make_stratum_stats(strata[s]);
    out.by_size.push_back(ss);
  }

  auto pool_level = [&out](double level, auto&& match) {
    LevelStats ls;
    ls.level = level;
    double sum_rej = 0.0, sum_r2 = 0.0, sum_p = 0.0;
    double false_count = 0.0, false_accept = 0.0;
    for (const CellSummary& cell : out.cells) {
      if (!match(cell.cfg)) continue;
      for (const RepRecord& rec : cell.reps) {
        ++ls.count;
        sum_rej += rec.rejected ? 1.0 : 0.0;
        sum_r2 += rec.r2;
        sum_p += rec.p_value;
        if (!rec.h0_true) {
          false_count += 1.0;
          false_accept += rec.rejected ? 0.0 : 1.0;
        }
      }
    }
    if (ls.count > 0) {
      const double c = static_cast<double>(ls.count);
      ls.rejection_rate = sum_rej / c;
      ls.mean_r2 = sum_r2 / c;
      ls.mean_p = sum_p / c;
      if (false_count > 0.0) ls.type2_rate = false_accept / false_count;
    }
    return ls;
  };

  for (double yf : spec.y_error_factors) {
    out.by_y_error.push_back(pool_level(
        yf, [yf](const SimConfig& c) { return c.y_error_factor == yf; }));
  }
  for (double xf : spec.x_error_factors) {
    out.by_x_error.push_back(pool_level(
        xf, [xf](const SimConfig& c) { return c.x_error_factor == xf; }));
  }
  for (double f : spec.f_factors) {
    out.by_f.push_back(pool_level(
        f, [f](const SimConfig& c) { return c.inclusion && c.f == f; }));
  }
  return out;
}

}  // namespace memv
