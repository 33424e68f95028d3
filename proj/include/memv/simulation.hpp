#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "memv/types.hpp"

namespace memv {

/**
 * One synthetic-data cell: two true covariates x1 ~ U[0, 1.5] and
 * x2 ~ U[0, 0.3], normal covariate errors with standard deviations
 * (0.75 * x_error_factor, 0.15 * x_error_factor), normal response error
 * with standard deviation y_error_factor times the mean noiseless response,
 * and a hypothesized variance sigma0_sq drawn as
 * pa_level * U[0.8, 1.2] * sigma_sq_true. When `inclusion` is set, a hidden
 * covariate x3 ~ U[0, 0.45 * f] enters the response with coefficient
 * x3_coeff but is not observed, making the two-covariate model invalid.
 */
struct SimConfig {
  int n = 100;
  double x_error_factor = 0.05;
  double y_error_factor = 0.05;
  double pa_level = 1.0;
  bool inclusion = false;
  double f = 1.0;
  int replications = 30;
  std::uint64_t seed = 0;
  Eigen::Vector2d c_true = Eigen::Vector2d(1.0, 1.0);
  double x3_coeff = 1.0;

  void validate() const;
  // Stream identifier covering every generation-relevant field, so that
  // distinct cells draw from distinct RNG streams under one seed.
  std::uint64_t cell_key() const;
};

// Latent truth behind one generated dataset. y = c_true'x (+ x3_coeff*x3
// when inclusion) + e and w = x + delta reconstruct the observed data
// exactly (same expression, same evaluation order).
struct SimTruth {
  Eigen::MatrixXd x;
  Eigen::VectorXd e;
  Eigen::MatrixXd delta;
  std::optional<Eigen::VectorXd> x3;
  Eigen::VectorXd c_true;
  double sigma_sq_true = 0.0;
  Eigen::MatrixXd s_true;
  double sigma0_sq = 0.0;
};

// Deterministic function of (cfg.seed, cfg.cell_key(), replication_index).
std::pair<Dataset, SimTruth> generate_dataset(const SimConfig& cfg,
                                              int replication_index);

// Per-replication outcome kept for stratum tables and correlations.
// h0_true means sigma_sq_true <= sigma0_sq; inclusion replications are
// always labeled h0_true = false (the fitted model itself is invalid).
struct RepRecord {
  bool rejected = false;
  bool h0_true = false;
  double p_value = 0.0;
  double r2 = 0.0;
  double sigma_sq_true = 0.0;
  double sigma0_sq = 0.0;
};

/**
 * Aggregates for one cell. type1_rate is defined only when every
 * replication is under a true H0 (then it is the rejection rate);
 * type2_rate only when every replication is under a false H0 (then it is
 * the acceptance rate). Cells straddling the boundary (pa_level = 1
 * without inclusion) define neither; their records carry the detail.
 */
struct CellSummary {
  SimConfig cfg;
  double rejection_rate = 0.0;
  double mean_r2 = 0.0;
  double mean_p = 0.0;
  std::optional<double> type1_rate;
  std::optional<double> type2_rate;
  std::vector<RepRecord> reps;
};

// Fits with S = s_true and tests at z_alpha = 3 for every replication.
CellSummary run_cell(const SimConfig& cfg);

/**
 * Full factorial grid: sizes x x_error_factors x y_error_factors x
 * pa_levels x {no inclusion, inclusion} x f_factors. f does not influence
 * no-inclusion cells' data generation, but such cells are still distinct
 * grid cells (distinct RNG streams); the default grid is 162 cells per
 * sample size, 4860 datasets per size at 30 replications.
 */
struct GridSpec {
  std::vector<int> sizes = {30, 100, 500, 5000};
  std::vector<double> x_error_factors = {0.01, 0.05, 0.2};
  std::vector<double> y_error_factors = {0.01, 0.05, 0.2};
  std::vector<double> pa_levels = {0.5, 1.0, 2.0};
  std::vector<double> f_factors = {0.1, 1.0, 3.0};
  int replications = 30;
  Eigen::Vector2d c_true = Eigen::Vector2d(1.0, 1.0);
  double x3_coeff = 1.0;

  void validate() const;
};

// Rows of the per-size summary table. Strata follow the per-replication
// H0 label: all, inclusion cells, no-inclusion true-H0, no-inclusion
// false-H0. Values that would average over an empty stratum, and Pearson
// correlations with a constant input, are absent rather than 0/0.
enum class Stratum { kAll = 0, kInclusion, kNoInclusionH0True, kNoInclusionH0False };

struct StratumStats {
  long count = 0;
  std::optional<double> rejection_rate;
  std::optional<double> mean_r2;
  std::optional<double> mean_p;
  std::optional<double> type2_rate;        // share of false-H0 reps not rejected
  std::optional<double> corr_p_reject;     // Pearson(p, rejection indicator)
  std::optional<double> corr_p_r2;         // Pearson(p, R^2)
  std::optional<double> corr_p_type2;      // Pearson(p, type-II indicator)
};

struct SizeSummary {
  int n = 0;
  std::array<StratumStats, 4> strata;
};

// Pooled-over-everything-else means for one level of one driving factor.
struct LevelStats {
  double level = 0.0;
  long count = 0;
  double rejection_rate = 0.0;
  double mean_r2 = 0.0;
  std::optional<double> type2_rate;
  double mean_p = 0.0;
};

struct GridResult {
  std::vector<CellSummary> cells;          // grid order
  std::vector<SizeSummary> by_size;
  std::vector<LevelStats> by_y_error;      // all cells
  std::vector<LevelStats> by_x_error;      // all cells
  std::vector<LevelStats> by_f;            // inclusion cells only
};

// Runs every cell (optionally across threads; results are bit-identical
// for any thread count) and aggregates the stratum and factor tables.
GridResult run_grid(const GridSpec& spec, std::uint64_t seed, int threads = 0);

}  // namespace memv
