#pragma once

#include <Eigen/Dense>

#include "memv/types.hpp"

namespace memv {

/** Sample second moments: m_ww = (1/n) sum w_i w_i', m_wy = (1/n) sum w_i y_i. */
struct Moments {
  Eigen::MatrixXd m_ww;
  Eigen::VectorXd m_wy;
};

Moments sample_moments(const Dataset& d);

/**
 * One adjusted-least-squares fit.
 *
 * sigma_tilde_sq may be negative (it is RSS/n minus the quadratic correction
 * c_hat' S c_hat); sigma_hat_sq = max(0, sigma_tilde_sq) always. gram_singular
 * is true when the pseudo-inverse of m_ww - S truncated at least one
 * eigenvalue, i.e. the fit fell back to a minimum-norm solution.
 */
struct ThetaEstimate {
  Eigen::VectorXd c_hat;
  double sigma_tilde_sq = 0.0;
  double sigma_hat_sq = 0.0;
  double rss = 0.0;
  bool gram_singular = false;
};

/**
 * Pseudo-inverse of a symmetric matrix via eigendecomposition.
 * Eigenvalues with |lambda_i| <= rel_tol * max|lambda| are zeroed;
 * `truncated` reports whether any were (including the all-zero matrix).
 */
struct SymmetricPinv {
  Eigen::MatrixXd pinv;
  bool truncated = false;
};

SymmetricPinv symmetric_pinv(const Eigen::MatrixXd& a, double rel_tol = 1e-12);

/**
 * Adjusted least squares: c_hat = (m_ww - S)^+ m_wy, then
 * RSS = sum (y_i - c_hat' w_i)^2, sigma_tilde_sq = RSS/n - c_hat' S c_hat,
 * sigma_hat_sq = max(0, sigma_tilde_sq).
 *
 * With S = 0 this reduces to ordinary least squares on the surrogate
 * covariates. There is no implicit intercept; append a constant-1 column
 * (with a zero row/column in S) to fit one.
 */
ThetaEstimate als_estimate(const Dataset& d, const ErrorModel& em);

/**
 * Coefficient of determination 1 - RSS / sum (y_i - ybar)^2 for a given
 * coefficient vector. May be negative for poor no-intercept fits. Throws
 * when the response is constant (zero total variance).
 */
double r_squared(const Dataset& d, const Eigen::VectorXd& c_hat);

}  // namespace memv
