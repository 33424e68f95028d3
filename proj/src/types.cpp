#include "memv/types.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <utility>

#include "memv/errors.hpp"

namespace memv {

Dataset::Dataset(Eigen::VectorXd y, Eigen::MatrixXd w,
                 std::vector<std::string> column_names)
    : y_(std::move(y)), w_(std::move(w)), names_(std::move(column_names)) {
  if (y_.size() < 1 || w_.cols() < 1) {
    throw data_error("dataset must have at least one row and one covariate");
  }
  if (y_.size() != w_.rows()) {
    throw data_error("response length and covariate row count disagree");
  }
  if (!y_.allFinite() || !w_.allFinite()) {
    throw data_error("dataset contains a non-finite value");
  }
  if (!names_.empty() &&
      names_.size() != static_cast<std::size_t>(w_.cols())) {
    throw data_error("column_names must be empty or name every covariate");
  }
}

ErrorModel::ErrorModel(Eigen::MatrixXd s, double sigma0_sq)
    : s_(std::move(s)), sigma0_sq_(sigma0_sq) {
  if (s_.rows() != s_.cols() || s_.rows() < 1) {
    throw data_error("error covariance must be square and nonempty");
  }
  if (!s_.allFinite() || !std::isfinite(sigma0_sq_)) {
    throw data_error("error model contains a non-finite value");
  }
  const double scale = s_.cwiseAbs().maxCoeff();
  const double asym = (s_ - s_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(1.0, scale)) {
    throw data_error("error covariance is not symmetric");
  }
  // Work on the symmetrized matrix so the eigenvalue check is exact.
  s_ = ((s_ + s_.transpose()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s_,
                                                     Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmin < -1e-10 * lmax) {
    throw data_error("error covariance is not positive semidefinite");
  }
  if (sigma0_sq_ < 0.0) {
    throw data_error("sigma0_sq must be nonnegative");
  }
}

}  // namespace memv
