#pragma once

#include <Eigen/Dense>

#include "memv/estimator.hpp"
#include "memv/types.hpp"

namespace memv {

// Estimating function value at one observation: s_c = w y - (w w' - S) c and
// s_sigma2 = (y - c'w)^2 - c'S c - sigma_sq. The fitted (c_hat, sigma_hat_sq)
// solve sum_i s_c = 0 and, when sigma_tilde_sq >= 0, sum_i s_sigma2 = 0.
struct EstimatingFunctionValue {
  Eigen::VectorXd s_c;
  double s_sigma2 = 0.0;
};

EstimatingFunctionValue eval_estimating_functions(double y,
                                                  const Eigen::VectorXd& w,
                                                  const Eigen::VectorXd& c,
                                                  double sigma_sq,
                                                  const Eigen::MatrixXd& S);

/**
 * Sandwich covariance estimate for theta_hat = (c_hat, sigma_hat_sq).
 *
 *   a_hat     = blockdiag(m_ww - S, 1)
 *   b_hat     = (1/n) sum_i s_theta s_theta' evaluated at theta_hat
 *   sigma_hat = a_hat^+ b_hat a_hat^+
 *
 * v_sigma2_sq is the lower-right entry of b_hat; because a_hat is
 * block-diagonal with unit lower-right entry, it equals the lower-right
 * entry of sigma_hat. se_hat = sqrt(v_sigma2_sq / n) is the standard error
 * of sigma_hat_sq.
 */
struct SandwichEstimate {
  Eigen::MatrixXd a_hat;
  Eigen::MatrixXd b_hat;
  Eigen::MatrixXd sigma_hat;
  double v_sigma2_sq = 0.0;
  double se_hat = 0.0;
  bool gram_singular = false;
};

SandwichEstimate sandwich(const Dataset& d, const ErrorModel& em,
                          const ThetaEstimate& theta);

/**
 * One-sided Wald test of H0: sigma_sq <= sigma0_sq.
 *
 * t_stat = (RSS/n - sigma0_sq - c_hat'S c_hat) /
 *          ( (1/sqrt(n)) * sqrt((1/n) sum r_i^4 - (RSS/n)^2) )
 * with residuals r_i = y_i - c_hat'w_i, and p_value = 1 - Phi(t_stat).
 *
 * The decision is reject = (sigma_hat_sq > sigma0_sq + z_alpha * se_hat).
 * se_bracket is the fourth-moment denominator above divided by sqrt(n);
 * se_sandwich is the sandwich standard error at the clamped estimate. The
 * two coincide (up to rounding) whenever sigma_tilde_sq >= 0; when
 * sigma_tilde_sq < 0 the decision uses se_sandwich and the difference
 * se_sandwich - se_bracket is a clamp diagnostic.
 */
struct TestResult {
  double t_stat = 0.0;
  double p_value = 0.0;
  bool reject = false;
  double z_alpha = 0.0;
  ThetaEstimate theta;
  double se_hat = 0.0;
  double se_bracket = 0.0;
  double se_sandwich = 0.0;
};

TestResult memv_test(const Dataset& d, const ErrorModel& em,
                     double z_alpha = 3.0);

// Standard normal CDF, absolute error below 1e-12 over the full real line.
double normal_cdf(double t);

// Inverse of normal_cdf on (0, 1). Used to convert a significance level
// alpha into the critical value z_alpha = Phi^-1(1 - alpha).
double normal_quantile(double p);

// Rule-of-thumb response-error variance RSS / (n - m); requires n > m.
double suggest_sigma0(const Dataset& d, const ThetaEstimate& theta);

}  // namespace memv
