#include "memv/kappa_sweep.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "memv/errors.hpp"
#include "memv/estimator.hpp"

namespace memv {

Eigen::MatrixXd sample_covariance(const Dataset& d) {
  if (d.n() < 2) {
    throw data_error("sample covariance requires at least two observations");
  }
  const Eigen::RowVectorXd mean = d.w().colwise().mean();
  const Eigen::MatrixXd centered = d.w().rowwise() - mean;
  Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(d.n() - 1);
  return ((cov + cov.transpose()) / 2.0).eval();
}

Eigen::MatrixXd build_presumed_s(const Eigen::MatrixXd& s_w_hat, double kappa,
                                 const std::optional<KnownBlock>& known) {
  if (s_w_hat.rows() != s_w_hat.cols()) {
    throw usage_error("covariate covariance matrix must be square");
  }
  if (!(kappa >= 0.0 && kappa < 1.0)) {
    throw usage_error("kappa must lie in [0, 1)");
  }
  const Eigen::Index m = s_w_hat.rows();
  if (!known) {
    return kappa * s_w_hat;
  }

  const auto& idx = known->indices;
  const Eigen::Index k = static_cast<Eigen::Index>(idx.size());
  if (known->s_known.rows() != k || known->s_known.cols() != k) {
    throw usage_error("known error-covariance block does not match its index set");
  }
  std::vector<bool> seen(static_cast<std::size_t>(m), false);
  for (Eigen::Index i : idx) {
    if (i < 0 || i >= m) {
      throw usage_error("known-block index out of range");
    }
    if (seen[static_cast<std::size_t>(i)]) {
      throw usage_error("known-block indices must be distinct");
    }
    seen[static_cast<std::size_t>(i)] = true;
  }

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      s(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]) =
          known->s_known(i, j);
    }
  }
  for (Eigen::Index a = 0; a < m; ++a) {
    if (seen[static_cast<std::size_t>(a)]) continue;
    for (Eigen::Index b = 0; b < m; ++b) {
      if (seen[static_cast<std::size_t>(b)]) continue;
      s(a, b) = kappa * s_w_hat(a, b);
    }
  }
  return s;
}

std::vector<double> default_kappa_grid() {
  std::vector<double> grid;
  grid.reserve(96);
  for (int i = 0; i <= 95; ++i) grid.push_back(i / 100.0);
  return grid;
}

SweepCurve sweep(const Dataset& d, double sigma0_sq,
                 const std::vector<double>& grid, double z_alpha,
                 const std::optional<KnownBlock>& known) {
  if (grid.empty()) {
    throw usage_error("kappa grid must not be empty");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] < 1.0)) {
      throw usage_error("kappa grid values must lie in [0, 1)");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw usage_error("kappa grid must be strictly increasing");
    }
  }
  if (!(sigma0_sq > 0.0)) {
    throw usage_error("sigma0_sq must be positive");
  }
  if (!std::isfinite(z_alpha) || z_alpha <= 0.0) {
    throw usage_error("z_alpha must be positive and finite");
  }
  if (d.n() < d.m() + 2) {
    throw data_error("sweep requires n >= m + 2");
  }

  SweepCurve curve;
  curve.s_w_hat = sample_covariance(d);
  curve.alpha = normal_cdf(-z_alpha);
  curve.points.reserve(grid.size());

  const Moments mo = sample_moments(d);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (double kappa : grid) {
    SweepPoint pt;
    pt.kappa = kappa;
    const Eigen::MatrixXd s_kappa =
        build_presumed_s(curve.s_w_hat, kappa, known);
    const ErrorModel em(s_kappa, sigma0_sq);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mo.m_ww - s_kappa,
                                                       Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    pt.degenerate = lmin < 1e-10 * lmax;

    try {
      pt.test = memv_test(d, em, z_alpha);
      pt.a_n = pt.test.theta.sigma_tilde_sq - sigma0_sq;
    } catch (const degeneracy_error&) {
      pt.degenerate = true;
      pt.test = TestResult{};
      pt.test.z_alpha = z_alpha;
      pt.test.t_stat = nan;
      pt.test.p_value = nan;
      pt.a_n = nan;
      try {
        pt.test.theta = als_estimate(d, em);
        pt.a_n = pt.test.theta.sigma_tilde_sq - sigma0_sq;
      } catch (const degeneracy_error&) {
      }
    }
    curve.points.push_back(std::move(pt));
  }

  // Maximal runs of consecutive non-degenerate points with one
  // classification; degenerate points terminate runs.
  bool open = false;
  bool open_reject = false;
  KappaInterval current;
  auto close = [&]() {
    if (!open) return;
    (open_reject ? curve.reject_intervals : curve.accept_intervals)
        .push_back(current);
    open = false;
  };
  for (const SweepPoint& pt : curve.points) {
    if (pt.degenerate) {
      close();
      continue;
    }
    const bool rej = pt.test.p_value < curve.alpha;
    if (open && rej == open_reject) {
      current.hi = pt.kappa;
    } else {
      close();
      open = true;
      open_reject = rej;
      current.lo = pt.kappa;
      current.hi = pt.kappa;
    }
  }
  close();
  return curve;
}

AsymptoticNumerator asymptotic_numerator(const TruthSpec& truth, double kappa,
                                         double sigma0_sq) {
  const Eigen::Index m = truth.c.size();
  if (truth.exx.rows() != m || truth.exx.cols() != m ||
      truth.s_true.rows() != m || truth.s_true.cols() != m ||
      truth.mean_x.size() != m) {
    throw usage_error("truth specification dimensions disagree");
  }
  if (!std::isfinite(kappa)) {
    throw usage_error("kappa must be finite");
  }

  const Eigen::MatrixXd s_w = truth.cov_w();
  const Eigen::MatrixXd denom = truth.eww() - kappa * s_w;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(denom);
  if (!lu.isInvertible()) {
    throw degeneracy_error("population gram matrix is singular at this kappa");
  }

  AsymptoticNumerator out;
  out.lambda = lu.solve(truth.exx);
  const Eigen::MatrixXd residual_map =
      Eigen::MatrixXd::Identity(m, m) - out.lambda;
  const Eigen::VectorXd rc = residual_map * truth.c;
  const Eigen::VectorXd lc = out.lambda * truth.c;
  out.a_inf = rc.dot(truth.exx * rc) +
              lc.dot((truth.s_true - kappa * s_w) * lc) +
              (truth.sigma_sq - sigma0_sq);
  return out;
}

}  // namespace memv
