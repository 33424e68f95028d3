#include "memv/estimator.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "memv/errors.hpp"

namespace memv {

Moments sample_moments(const Dataset& d) {
  const double n = static_cast<double>(d.n());
  Moments mo;
  mo.m_ww = (d.w().transpose() * d.w()) / n;
  // Symmetrize so downstream eigendecompositions see an exactly symmetric
  // matrix regardless of accumulation order.
  mo.m_ww = ((mo.m_ww + mo.m_ww.transpose()) / 2.0).eval();
  mo.m_wy = (d.w().transpose() * d.y()) / n;
  return mo;
}

SymmetricPinv symmetric_pinv(const Eigen::MatrixXd& a, double rel_tol) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("symmetric_pinv requires a square matrix");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) {
    throw degeneracy_error("eigendecomposition failed");
  }
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double lmax = lam.cwiseAbs().maxCoeff();
  const double tol = rel_tol * lmax;

  SymmetricPinv out;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (std::abs(lam[i]) <= tol) {
      out.truncated = true;
    } else {
      inv[i] = 1.0 / lam[i];
    }
  }
  out.pinv = eig.eigenvectors() * inv.asDiagonal() *
             eig.eigenvectors().transpose();
  return out;
}

ThetaEstimate als_estimate(const Dataset& d, const ErrorModel& em) {
  if (em.m() != d.m()) {
    throw data_error("error covariance dimension does not match covariates");
  }
  const Moments mo = sample_moments(d);
  const Eigen::MatrixXd gram = mo.m_ww - em.s();
  const SymmetricPinv pinv = symmetric_pinv(gram);

  ThetaEstimate theta;
  theta.c_hat = pinv.pinv * mo.m_wy;
  theta.gram_singular = pinv.truncated;
  theta.rss = (d.y() - d.w() * theta.c_hat).squaredNorm();
  const double n = static_cast<double>(d.n());
  const double correction = theta.c_hat.dot(em.s() * theta.c_hat);
  theta.sigma_tilde_sq = theta.rss / n - correction;
  theta.sigma_hat_sq = std::max(0.0, theta.sigma_tilde_sq);

  if (!theta.c_hat.allFinite() || !std::isfinite(theta.rss) ||
      !std::isfinite(theta.sigma_tilde_sq)) {
    throw degeneracy_error("fit produced a non-finite value");
  }
  return theta;
}

double r_squared(const Dataset& d, const Eigen::VectorXd& c_hat) {
  if (c_hat.size() != d.m()) {
    throw data_error("coefficient length does not match covariates");
  }
  if (!c_hat.allFinite()) {
    throw data_error("coefficients contain a non-finite value");
  }
  const double n = static_cast<double>(d.n());
  const double ybar = d.y().mean();
  const double tss = (d.y().array() - ybar).matrix().squaredNorm();
  if (tss <= 1e-20 * n * (ybar * ybar + 1.0)) {
    throw degeneracy_error("response is constant; R^2 is undefined");
  }
  const double rss = (d.y() - d.w() * c_hat).squaredNorm();
  return 1.0 - rss / tss;
}

}  // namespace memv
