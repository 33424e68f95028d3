#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "memv/inference.hpp"
#include "memv/types.hpp"

namespace memv {

// Unbiased sample covariance of the covariate rows,
// (1/(n-1)) sum (w_i - wbar)(w_i - wbar)'. Requires n >= 2.
Eigen::MatrixXd sample_covariance(const Dataset& d);

// Covariates whose error covariance is known exactly. `indices` selects the
// covariate columns (0-based, distinct, in range) and `s_known` is the
// corresponding block, in the order given by `indices`.
struct KnownBlock {
  std::vector<Eigen::Index> indices;
  Eigen::MatrixXd s_known;
};

/**
 * Presumed error covariance for one grid point: kappa * s_w_hat, or, with a
 * known block, a block-diagonal combination (known entries verbatim, the
 * complement scaled by kappa, cross-blocks zero). kappa must lie in [0, 1).
 */
Eigen::MatrixXd build_presumed_s(const Eigen::MatrixXd& s_w_hat, double kappa,
                                 const std::optional<KnownBlock>& known = {});

// One grid point of the sweep. a_n is the numerator of the test statistic,
// RSS/n - sigma0_sq - c_hat' S_kappa c_hat, at this point's presumed S.
// degenerate marks points where m_ww - S_kappa has smallest eigenvalue
// below 1e-10 times its largest (the fit there is unreliable) or where the
// test could not produce finite values.
struct SweepPoint {
  double kappa = 0.0;
  TestResult test;
  double a_n = 0.0;
  bool degenerate = false;
};

// Closed kappa range covering a maximal run of consecutive non-degenerate
// grid points with a common accept/reject classification.
struct KappaInterval {
  double lo = 0.0;
  double hi = 0.0;
};

struct SweepCurve {
  std::vector<SweepPoint> points;      // strictly increasing kappa
  Eigen::MatrixXd s_w_hat;             // sample covariance used for scaling
  std::vector<KappaInterval> accept_intervals;  // p >= alpha
  std::vector<KappaInterval> reject_intervals;  // p < alpha
  double alpha = 0.0;                  // 1 - Phi(z_alpha)
};

/**
 * Validity sweep for unknown covariate-error covariance: for each kappa in
 * `grid`, presume S = kappa * s_w_hat (plus any known block), fit, and test
 * H0: sigma_sq <= sigma0_sq. Grid values must be strictly increasing and in
 * [0, 1). Degenerate points are reported, never interpolated, and excluded
 * from the accept/reject intervals; runs do not merge across them.
 */
SweepCurve sweep(const Dataset& d, double sigma0_sq,
                 const std::vector<double>& grid, double z_alpha = 3.0,
                 const std::optional<KnownBlock>& known = {});

// kappa = 0.00, 0.01, ..., 0.95.
std::vector<double> default_kappa_grid();

/**
 * Population description of a structural model, for asymptotic analysis:
 * x has mean mean_x and raw second moment exx = E[x x'], the covariate
 * errors have covariance s_true, the true coefficients are c and the true
 * response-error variance sigma_sq. Derived: E[w w'] = exx + s_true and
 * Cov(w) = (exx - mean_x mean_x') + s_true.
 */
struct TruthSpec {
  Eigen::VectorXd c;
  double sigma_sq = 0.0;
  Eigen::MatrixXd s_true;
  Eigen::VectorXd mean_x;
  Eigen::MatrixXd exx;

  Eigen::MatrixXd eww() const { return exx + s_true; }
  Eigen::MatrixXd cov_x() const {
    return exx - mean_x * mean_x.transpose();
  }
  Eigen::MatrixXd cov_w() const { return cov_x() + s_true; }
};

// Large-sample limit of a_n at one kappa:
//   lambda = (E[w w'] - kappa Cov(w))^-1 E[x x']
//   a_inf  = c'(I - lambda)' E[x x'] (I - lambda) c
//          + c' lambda' (s_true - kappa Cov(w)) lambda c
//          + (sigma_sq - sigma0_sq)
// Throws when E[w w'] - kappa Cov(w) is singular.
struct AsymptoticNumerator {
  Eigen::MatrixXd lambda;
  double a_inf = 0.0;
};

AsymptoticNumerator asymptotic_numerator(const TruthSpec& truth, double kappa,
                                         double sigma0_sq);

}  // namespace memv
