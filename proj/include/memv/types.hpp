#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace memv {

/**
 * Observed sample for the errors-in-variables regression y = c'x + e,
 * w = x + delta. Holds the n responses and the n x m surrogate covariate
 * rows; the latent x, e, delta are not part of observed data.
 *
 * Invariants enforced on construction:
 *   - n >= 1, m >= 1, y.size() == w.rows()
 *   - every entry of y and w is finite
 *   - column_names is empty or has exactly m entries
 */
class Dataset {
 public:
  Dataset(Eigen::VectorXd y, Eigen::MatrixXd w,
          std::vector<std::string> column_names = {});

  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::MatrixXd& w() const { return w_; }
  const std::vector<std::string>& column_names() const { return names_; }

  Eigen::Index n() const { return y_.size(); }
  Eigen::Index m() const { return w_.cols(); }

 private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd w_;
  std::vector<std::string> names_;
};

/**
 * Presumed error structure: S is the covariate-error covariance Cov(delta),
 * sigma0_sq the hypothesized upper bound for the response-error variance.
 *
 * S must be symmetric (1e-10 relative tolerance) and positive semidefinite
 * up to an eigenvalue tolerance of -1e-10 times the largest eigenvalue;
 * zero rows/columns are allowed (error-free covariates, e.g. an appended
 * constant-1 column for an intercept). sigma0_sq must be nonnegative; the
 * hypothesis test additionally requires it to be strictly positive.
 */
class ErrorModel {
 public:
  explicit ErrorModel(Eigen::MatrixXd s, double sigma0_sq = 0.0);

  const Eigen::MatrixXd& s() const { return s_; }
  double sigma0_sq() const { return sigma0_sq_; }
  Eigen::Index m() const { return s_.rows(); }

 private:
  Eigen::MatrixXd s_;
  double sigma0_sq_;
};

}  // namespace memv
