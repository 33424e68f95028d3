#include "memv/inference.hpp"

#include <cmath>
#include <limits>

#include "memv/errors.hpp"

namespace memv {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Per-observation score stack (s_c; s_sigma2) evaluated at (c, sigma_sq),
// as an n x (m+1) matrix with one score per row.
Eigen::MatrixXd score_matrix(const Dataset& d, const Eigen::MatrixXd& S,
                             const Eigen::VectorXd& c, double sigma_sq) {
  const Eigen::Index n = d.n();
  const Eigen::Index m = d.m();
  const Eigen::VectorXd sc = S * c;
  const double quad = c.dot(sc);
  const Eigen::VectorXd r = d.y() - d.w() * c;

  Eigen::MatrixXd scores(n, m + 1);
  // s_c = w y - (w w' - S) c = w (y - w'c) + S c, one row per observation.
  scores.leftCols(m) = (d.w().array().colwise() * r.array()).matrix();
  scores.leftCols(m).rowwise() += sc.transpose();
  scores.col(m) = (r.array().square() - quad - sigma_sq).matrix();
  return scores;
}

}  // namespace

EstimatingFunctionValue eval_estimating_functions(double y,
                                                  const Eigen::VectorXd& w,
                                                  const Eigen::VectorXd& c,
                                                  double sigma_sq,
                                                  const Eigen::MatrixXd& S) {
  if (w.size() != c.size() || S.rows() != S.cols() || S.rows() != w.size()) {
    throw std::invalid_argument("estimating function dimension mismatch");
  }
  EstimatingFunctionValue v;
  const double r = y - c.dot(w);
  v.s_c = w * y - (w * w.transpose() - S) * c;
  v.s_sigma2 = r * r - c.dot(S * c) - sigma_sq;
  return v;
}

SandwichEstimate sandwich(const Dataset& d, const ErrorModel& em,
                          const ThetaEstimate& theta) {
  if (em.m() != d.m() || theta.c_hat.size() != d.m()) {
    throw data_error("sandwich dimension mismatch");
  }
  const Eigen::Index m = d.m();
  const double n = static_cast<double>(d.n());
  const Moments mo = sample_moments(d);

  SandwichEstimate out;
  out.a_hat = Eigen::MatrixXd::Zero(m + 1, m + 1);
  out.a_hat.topLeftCorner(m, m) = mo.m_ww - em.s();
  out.a_hat(m, m) = 1.0;

  const Eigen::MatrixXd scores =
      score_matrix(d, em.s(), theta.c_hat, theta.sigma_hat_sq);
  out.b_hat = (scores.transpose() * scores) / n;
  out.b_hat = ((out.b_hat + out.b_hat.transpose()) / 2.0).eval();

  const SymmetricPinv gram_pinv =
      symmetric_pinv(out.a_hat.topLeftCorner(m, m));
  out.gram_singular = gram_pinv.truncated;
  Eigen::MatrixXd a_pinv = Eigen::MatrixXd::Zero(m + 1, m + 1);
  a_pinv.topLeftCorner(m, m) = gram_pinv.pinv;
  a_pinv(m, m) = 1.0;
  out.sigma_hat = a_pinv * out.b_hat * a_pinv;

  out.v_sigma2_sq = out.b_hat(m, m);
  out.se_hat = std::sqrt(std::max(0.0, out.v_sigma2_sq) / n);
  return out;
}

TestResult memv_test(const Dataset& d, const ErrorModel& em, double z_alpha) {
  if (!(em.sigma0_sq() > 0.0)) {
    throw usage_error("sigma0_sq must be positive for the hypothesis test");
  }
  if (d.n() < d.m() + 2) {
    throw data_error("hypothesis test requires n >= m + 2");
  }
  if (!std::isfinite(z_alpha) || z_alpha <= 0.0) {
    throw usage_error("z_alpha must be positive and finite");
  }

  TestResult res;
  res.z_alpha = z_alpha;
  res.theta = als_estimate(d, em);

  const double n = static_cast<double>(d.n());
  const Eigen::ArrayXd r = (d.y() - d.w() * res.theta.c_hat).array();
  const double mean_r2 = res.theta.rss / n;
  const double mean_r4 = r.square().square().mean();
  const double bracket = mean_r4 - mean_r2 * mean_r2;
  if (!(bracket >= 1e-14 * std::max(1.0, mean_r2 * mean_r2))) {
    throw degeneracy_error(
        "degenerate residual distribution: the statistic's denominator "
        "vanishes (all residuals have the same magnitude)");
  }

  const double numerator = res.theta.sigma_tilde_sq - em.sigma0_sq();
  res.se_bracket = std::sqrt(bracket / n);
  res.t_stat = numerator / res.se_bracket;
  res.p_value = normal_cdf(-res.t_stat);

  const SandwichEstimate sand = sandwich(d, em, res.theta);
  res.se_sandwich = sand.se_hat;
  res.se_hat =
      res.theta.sigma_tilde_sq >= 0.0 ? res.se_bracket : res.se_sandwich;
  res.reject =
      res.theta.sigma_hat_sq > em.sigma0_sq() + z_alpha * res.se_hat;

  if (!std::isfinite(res.t_stat) || !std::isfinite(res.p_value)) {
    throw degeneracy_error("test statistic is non-finite");
  }
  return res;
}

double normal_cdf(double t) {
  if (!std::isfinite(t)) {
    throw std::invalid_argument("normal_cdf requires a finite argument");
  }
  return 0.5 * std::erfc(-t / kSqrt2);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile requires p in (0, 1)");
  }
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 120 && hi - lo > 1e-14; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  // Two Newton steps sharpen the bisection result to full precision.
  for (int i = 0; i < 2; ++i) {
    const double density =
        std::exp(-0.5 * x * x) / 2.5066282746310002;
    if (density < std::numeric_limits<double>::min()) break;
    x -= (normal_cdf(x) - p) / density;
  }
  return x;
}

double suggest_sigma0(const Dataset& d, const ThetaEstimate& theta) {
  if (d.n() <= d.m()) {
    throw data_error("suggestion requires more observations than covariates");
  }
  return theta.rss / static_cast<double>(d.n() - d.m());
}

}  // namespace memv
