#include "memv/inference.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "memv/errors.hpp"
#include "memv/estimator.hpp"
#include "memv/rng.hpp"
#include "memv/types.hpp"

using memv::Dataset;
using memv::ErrorModel;
using memv::Rng;
using memv::TestResult;
using memv::ThetaEstimate;

namespace {

// Independent errors-in-variables draw: y = c'x + e, w = x + delta.
Dataset random_eiv(Rng& rng, int n, const Eigen::VectorXd& c,
                   double delta_sd, double e_sd,
                   Eigen::MatrixXd* s_out = nullptr) {
  const Eigen::Index m = c.size();
  Eigen::MatrixXd w(n, m);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double mean = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double x = rng.uniform(0.0, 2.0);
      mean += c(j) * x;
      w(i, j) = x + rng.normal(0.0, delta_sd);
    }
    y(i) = mean + rng.normal(0.0, e_sd);
  }
  if (s_out) {
    *s_out = delta_sd * delta_sd * Eigen::MatrixXd::Identity(m, m);
  }
  return Dataset(std::move(y), std::move(w));
}

}  // namespace

TEST_CASE("estimating functions match hand arithmetic") {
  Eigen::VectorXd w(1), c(1);
  w << 3.0;
  c << 0.5;
  Eigen::MatrixXd s(1, 1);
  s << 0.2;

  // s_c = 3*2 - (9 - 0.2)*0.5 = 1.6
  // s_sigma2 = (2 - 1.5)^2 - 0.5*0.2*0.5 - 1 = 0.25 - 0.05 - 1 = -0.8
  const memv::EstimatingFunctionValue v =
      memv::eval_estimating_functions(2.0, w, c, 1.0, s);
  CHECK(v.s_c(0) == doctest::Approx(1.6).epsilon(1e-14));
  CHECK(v.s_sigma2 == doctest::Approx(-0.8).epsilon(1e-14));
}

TEST_CASE("estimating functions reduce to raw moments at the origin") {
  Eigen::VectorXd w(2);
  w << 1.5, -2.0;
  const Eigen::VectorXd c = Eigen::VectorXd::Zero(2);
  const Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2, 2);

  const double y = 0.7;
  const memv::EstimatingFunctionValue v =
      memv::eval_estimating_functions(y, w, c, 0.0, s);
  CHECK((v.s_c - w * y).norm() == 0.0);
  CHECK(v.s_sigma2 == y * y);
}

TEST_CASE("estimating functions vanish on an exact fit") {
  Eigen::VectorXd w(2), c(2);
  w << 2.0, -1.0;
  c << 0.5, 3.0;
  const Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2, 2);

  const double y = c.dot(w);
  const memv::EstimatingFunctionValue v =
      memv::eval_estimating_functions(y, w, c, 0.0, s);
  CHECK(v.s_sigma2 == 0.0);
}

TEST_CASE("estimating functions reject dimension mismatches") {
  Eigen::VectorXd w(2), c(3);
  w << 1, 2;
  c << 1, 2, 3;
  const Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(memv::eval_estimating_functions(1.0, w, c, 0.0, s2),
                  std::invalid_argument);
  const Eigen::MatrixXd s3 = Eigen::MatrixXd::Zero(3, 3);
  Eigen::VectorXd c2(2);
  c2 << 1, 2;
  CHECK_THROWS_AS(memv::eval_estimating_functions(1.0, w, c2, 0.0, s3),
                  std::invalid_argument);
}

TEST_CASE("fitted parameters zero the summed estimating functions") {
  Rng rng(memv::mix_key(77, 1));
  const Eigen::VectorXd c = (Eigen::VectorXd(2) << 1.0, -0.5).finished();
  Eigen::MatrixXd s;
  const Dataset d = random_eiv(rng, 300, c, 0.2, 0.4, &s);
  const ErrorModel em(s);
  const ThetaEstimate theta = memv::als_estimate(d, em);
  REQUIRE(theta.sigma_tilde_sq >= 0.0);

  Eigen::VectorXd sum_c = Eigen::VectorXd::Zero(2);
  double sum_s2 = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const memv::EstimatingFunctionValue v = memv::eval_estimating_functions(
        d.y()(i), d.w().row(i).transpose(), theta.c_hat, theta.sigma_hat_sq,
        s);
    sum_c += v.s_c;
    sum_s2 += v.s_sigma2;
  }
  const double scale = static_cast<double>(d.n());
  CHECK(sum_c.norm() < 1e-9 * scale);
  CHECK(std::abs(sum_s2) < 1e-9 * scale);
}

TEST_CASE("sandwich matches a two-point hand computation") {
  // w = (1, 1), y = (0, 2), S = 0: c_hat = 1, residuals (-1, 1),
  // sigma_hat_sq = 1, so every s_sigma2 term is r^2 - 1 = 0.
  Eigen::MatrixXd w(2, 1);
  w << 1, 1;
  const Dataset d(Eigen::Vector2d(0, 2), w);
  const ErrorModel em(Eigen::MatrixXd::Zero(1, 1));
  const ThetaEstimate theta = memv::als_estimate(d, em);
  REQUIRE(theta.c_hat(0) == doctest::Approx(1.0).epsilon(1e-14));
  REQUIRE(theta.sigma_hat_sq == doctest::Approx(1.0).epsilon(1e-14));

  const memv::SandwichEstimate sand = memv::sandwich(d, em, theta);
  CHECK(sand.a_hat(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sand.a_hat(0, 1) == 0.0);
  CHECK(sand.a_hat(1, 0) == 0.0);
  CHECK(sand.a_hat(1, 1) == 1.0);
  // s_c rows are w*r = (-1, 1); b_hat = (1/2) sum s s' = [[1, 0], [0, 0]].
  CHECK(sand.b_hat(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::abs(sand.b_hat(0, 1)) < 1e-14);
  CHECK(std::abs(sand.b_hat(1, 1)) < 1e-28);
  CHECK(sand.v_sigma2_sq == doctest::Approx(0.0));
  CHECK(sand.se_hat == doctest::Approx(0.0));
  CHECK(!sand.gram_singular);
}

TEST_CASE("sandwich bread matrix is block diagonal") {
  Rng rng(memv::mix_key(77, 2));
  const Eigen::VectorXd c = (Eigen::VectorXd(2) << 2.0, 1.0).finished();
  Eigen::MatrixXd s;
  const Dataset d = random_eiv(rng, 50, c, 0.1, 0.3, &s);
  const ErrorModel em(s);
  const ThetaEstimate theta = memv::als_estimate(d, em);

  const memv::SandwichEstimate sand = memv::sandwich(d, em, theta);
  REQUIRE(sand.a_hat.rows() == 3);
  CHECK(sand.a_hat(0, 2) == 0.0);
  CHECK(sand.a_hat(1, 2) == 0.0);
  CHECK(sand.a_hat(2, 0) == 0.0);
  CHECK(sand.a_hat(2, 1) == 0.0);
  CHECK(sand.a_hat(2, 2) == 1.0);
  const Eigen::MatrixXd gram =
      memv::sample_moments(d).m_ww - s;
  CHECK((sand.a_hat.topLeftCorner(2, 2) - gram).norm() < 1e-14);
  // b_hat and sigma_hat are symmetric by construction.
  CHECK((sand.b_hat - sand.b_hat.transpose()).norm() == 0.0);
  CHECK((sand.sigma_hat - sand.sigma_hat.transpose()).norm() < 1e-12);
}

TEST_CASE("sandwich rejects mismatched dimensions") {
  Eigen::MatrixXd w(4, 2);
  w << 1, 2, 3, 4, 5, 6, 7, 8;
  const Dataset d(Eigen::Vector4d(1, 2, 3, 4), w);
  const ErrorModel em1(Eigen::MatrixXd::Zero(1, 1));
  ThetaEstimate theta;
  theta.c_hat = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(memv::sandwich(d, em1, theta), memv::data_error);
  const ErrorModel em2(Eigen::MatrixXd::Zero(2, 2));
  theta.c_hat = Eigen::VectorXd::Zero(1);
  CHECK_THROWS_AS(memv::sandwich(d, em2, theta), memv::data_error);
}

TEST_CASE("normal cdf matches frozen high-precision values") {
  struct Entry {
    double t;
    double phi;
  };
  // Reference values computed with an independent arbitrary-precision
  // erf implementation and rounded to 25 significant digits.
  const Entry table[] = {
      {-8.0, 6.220960574271784123515995e-16},
      {-5.0, 2.866515718791939116737523e-7},
      {-3.0, 0.001349898031630094526651815},
      {-2.0, 0.02275013194817920720028264},
      {-1.0, 0.1586552539314570514147675},
      {-0.5, 0.3085375387259868963622954},
      {0.0, 0.5},
      {0.31, 0.6217195218220192790941933},
      {1.0, 0.8413447460685429485852325},
      {1.6448536269514727, 0.95},
      {2.0, 0.9772498680518207927997174},
      {3.0, 0.9986501019683699054733482},
      {3.5, 0.9997673709209644749636501},
      {5.0, 0.9999997133484281208060883},
      {8.0, 0.9999999999999993779039426},
  };
  for (const Entry& e : table) {
    CHECK(std::abs(memv::normal_cdf(e.t) - e.phi) < 1e-12);
  }
  // The far negative tail must also be accurate in relative terms.
  CHECK(memv::normal_cdf(-8.0) ==
        doctest::Approx(6.220960574271784123515995e-16).epsilon(1e-12));
  CHECK(memv::normal_cdf(-5.0) ==
        doctest::Approx(2.866515718791939116737523e-7).epsilon(1e-12));
}

TEST_CASE("normal cdf is symmetric and monotone") {
  const double ts[] = {0.0, 0.25, 0.5, 1.0, 1.7, 2.4, 3.3, 5.0};
  for (double t : ts) {
    CHECK(std::abs(memv::normal_cdf(-t) + memv::normal_cdf(t) - 1.0) <
          1e-12);
  }
  // Strict growth holds while 1 - Phi(t) stays above the rounding floor;
  // past t = 8 the double result saturates at 1.
  double prev = memv::normal_cdf(-10.0);
  for (double t = -9.5; t <= 8.0; t += 0.5) {
    const double cur = memv::normal_cdf(t);
    CHECK(cur > prev);
    prev = cur;
  }
  CHECK(memv::normal_cdf(9.0) == 1.0);
  CHECK_THROWS_AS(
      memv::normal_cdf(std::numeric_limits<double>::quiet_NaN()),
      std::invalid_argument);
  CHECK_THROWS_AS(
      memv::normal_cdf(std::numeric_limits<double>::infinity()),
      std::invalid_argument);
}

TEST_CASE("normal quantile inverts the cdf") {
  const double ps[] = {1e-6, 0.01, 0.05, 0.31, 0.5, 0.9, 0.999, 1 - 1e-6};
  for (double p : ps) {
    const double x = memv::normal_quantile(p);
    CHECK(std::abs(memv::normal_cdf(x) - p) < 1e-12);
  }
  CHECK(memv::normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(memv::normal_quantile(0.95) - 1.6448536269514722) < 1e-9);

  CHECK_THROWS_AS(memv::normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(memv::normal_quantile(1.0), std::invalid_argument);
  CHECK_THROWS_AS(memv::normal_quantile(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(
      memv::normal_quantile(std::numeric_limits<double>::quiet_NaN()),
      std::invalid_argument);
}

TEST_CASE("test statistic centers at the point estimate") {
  Rng rng(memv::mix_key(77, 3));
  const Eigen::VectorXd c = (Eigen::VectorXd(1) << 1.5).finished();
  Eigen::MatrixXd s;
  const Dataset d = random_eiv(rng, 200, c, 0.15, 0.5, &s);

  const ThetaEstimate pilot = memv::als_estimate(d, ErrorModel(s));
  REQUIRE(pilot.sigma_tilde_sq > 0.0);

  // With sigma0_sq equal to the point estimate the numerator cancels
  // exactly, so T = 0 and p = 1/2.
  const TestResult res =
      memv::memv_test(d, ErrorModel(s, pilot.sigma_tilde_sq));
  CHECK(res.t_stat == 0.0);
  CHECK(res.p_value == 0.5);
  CHECK(!res.reject);
}

TEST_CASE("p-value equals the upper tail of the statistic") {
  Rng rng(memv::mix_key(77, 4));
  const Eigen::VectorXd c = (Eigen::VectorXd(2) << 1.0, 2.0).finished();
  Eigen::MatrixXd s;
  const Dataset d = random_eiv(rng, 150, c, 0.1, 0.6, &s);

  const TestResult res = memv::memv_test(d, ErrorModel(s, 0.2));
  CHECK(std::abs(res.p_value - (1.0 - memv::normal_cdf(res.t_stat))) <
        1e-12);
  CHECK(res.p_value >= 0.0);
  CHECK(res.p_value <= 1.0);
}

TEST_CASE("p-value increases with the hypothesized variance") {
  Rng rng(memv::mix_key(77, 5));
  const Eigen::VectorXd c = (Eigen::VectorXd(1) << 2.0).finished();
  Eigen::MatrixXd s;
  const Dataset d = random_eiv(rng, 120, c, 0.1, 0.5, &s);

  // Bounds a few standard errors around the point estimate keep the
  // statistic inside the range where the p-value is strictly below 1.
  const TestResult pilot = memv::memv_test(d, ErrorModel(s, 0.1));
  const double center = pilot.theta.sigma_tilde_sq;
  const double se = pilot.se_bracket;
  double prev_t = std::numeric_limits<double>::infinity();
  double prev_p = -1.0;
  for (double k : {-4.0, -2.0, 0.5, 2.0, 4.0}) {
    const double sigma0 = center + k * se;
    REQUIRE(sigma0 > 0.0);
    const TestResult res = memv::memv_test(d, ErrorModel(s, sigma0));
    CHECK(res.t_stat < prev_t);
    CHECK(res.p_value > prev_p);
    prev_t = res.t_stat;
    prev_p = res.p_value;
  }
}

TEST_CASE("decision forms coincide when the estimate is unclamped") {
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    Rng local(memv::mix_key(778899, trial));
    const int n = 40 + static_cast<int>(local.uniform01() * 160);
    const int m = 1 + static_cast<int>(local.uniform01() * 3);
    Eigen::VectorXd c(m);
    for (int j = 0; j < m; ++j) c(j) = local.uniform(-2.0, 2.0);
    Eigen::MatrixXd s;
    const Dataset d = random_eiv(local, n, c, 0.1, 0.5, &s);
    const double sigma0 = local.uniform(0.05, 0.6);
    const double z = local.uniform(1.0, 3.0);

    TestResult res;
    try {
      res = memv::memv_test(d, ErrorModel(s, sigma0), z);
    } catch (const memv::degeneracy_error&) {
      continue;
    }
    if (res.theta.sigma_tilde_sq < 0.0) continue;
    ++checked;

    // Threshold form sigma_hat_sq > sigma0_sq + z*se versus statistic
    // form T > z: identical because se_hat is the bracket denominator.
    CHECK(res.reject == (res.t_stat > z));
    CHECK(res.se_hat == res.se_bracket);

    // The bracket equals the sandwich variance estimate for sigma_hat_sq.
    const memv::SandwichEstimate sand =
        memv::sandwich(d, ErrorModel(s, sigma0), res.theta);
    const double bracket =
        res.se_bracket * res.se_bracket * static_cast<double>(d.n());
    CHECK(bracket ==
          doctest::Approx(sand.v_sigma2_sq).epsilon(1e-9));
    CHECK(res.reject ==
          (res.theta.sigma_hat_sq > sigma0 + z * sand.se_hat));
  }
  CHECK(checked > 30);
}

TEST_CASE("clamped estimate falls back to the sandwich error") {
  Rng rng(memv::mix_key(77, 7));
  const Eigen::VectorXd c = (Eigen::VectorXd(1) << 1.0).finished();
  const Dataset d = random_eiv(rng, 80, c, 0.2, 0.05);
  // Presume far more covariate error than the draw contains, forcing
  // sigma_tilde_sq below zero.
  Eigen::MatrixXd s_over(1, 1);
  s_over << 0.5;

  const TestResult res = memv::memv_test(d, ErrorModel(s_over, 0.01));
  REQUIRE(res.theta.sigma_tilde_sq < 0.0);
  CHECK(res.theta.sigma_hat_sq == 0.0);
  CHECK(res.se_hat == res.se_sandwich);
  CHECK(!res.reject);
  CHECK(res.p_value > 0.5);
}

TEST_CASE("zero response error with noisy covariates accepts the bound") {
  Rng rng(memv::mix_key(77, 8));
  const int n = 400;
  Eigen::MatrixXd w(n, 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform(0.0, 2.0);
    y(i) = 2.0 * x;
    w(i, 0) = x + rng.normal(0.0, 0.3);
  }
  Eigen::MatrixXd s(1, 1);
  s << 0.09;

  // Residuals vary through the covariate error alone; the response error
  // is zero, far below the hypothesized bound.
  const TestResult res = memv::memv_test(Dataset(y, w), ErrorModel(s, 1.0));
  CHECK(!res.reject);
  CHECK(res.t_stat < 0.0);
  CHECK(res.p_value > 0.5);
}

TEST_CASE("exact linear data has a degenerate statistic") {
  Eigen::MatrixXd w(6, 1);
  w << 1, 2, 3, 4, 5, 6;
  const Eigen::VectorXd y = 2.0 * w.col(0);
  const Dataset d(y, w);
  try {
    memv::memv_test(d, ErrorModel(Eigen::MatrixXd::Zero(1, 1), 0.5));
    FAIL("expected a degeneracy error");
  } catch (const memv::degeneracy_error& e) {
    CHECK(std::string(e.what()).find("degenerate residual distribution") !=
          std::string::npos);
  }
}

TEST_CASE("hypothesis test validates its inputs") {
  Eigen::MatrixXd w(8, 2);
  Eigen::VectorXd y(8);
  for (int i = 0; i < 8; ++i) {
    w(i, 0) = i + 1;
    w(i, 1) = (i * 7) % 5;
    y(i) = 0.5 * w(i, 0) - w(i, 1) + 0.1 * ((i % 3) - 1);
  }
  const Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2, 2);

  CHECK_THROWS_AS(memv::memv_test(Dataset(y, w), ErrorModel(s, 0.0)),
                  memv::usage_error);
  CHECK_THROWS_AS(memv::memv_test(Dataset(y, w), ErrorModel(s, 0.1), 0.0),
                  memv::usage_error);
  CHECK_THROWS_AS(memv::memv_test(Dataset(y, w), ErrorModel(s, 0.1), -2.0),
                  memv::usage_error);
  CHECK_THROWS_AS(
      memv::memv_test(Dataset(y, w), ErrorModel(s, 0.1),
                      std::numeric_limits<double>::infinity()),
      memv::usage_error);

  // n < m + 2 leaves no room for the variance estimate.
  const Dataset tiny(y.head(3), w.topRows(3));
  CHECK_THROWS_AS(memv::memv_test(tiny, ErrorModel(s, 0.1)),
                  memv::data_error);
}

TEST_CASE("suggested variance is the residual mean square") {
  Eigen::MatrixXd w(5, 1);
  w << 1, 2, 3, 4, 5;
  Eigen::VectorXd y(5);
  y << 1.1, 2.1, 2.9, 4.2, 5.0;
  const Dataset d(y, w);
  const ErrorModel em(Eigen::MatrixXd::Zero(1, 1));
  const ThetaEstimate theta = memv::als_estimate(d, em);
  CHECK(memv::suggest_sigma0(d, theta) ==
        doctest::Approx(theta.rss / 4.0).epsilon(1e-14));

  // An exact fit suggests zero.
  const Eigen::VectorXd y2 = 3.0 * w.col(0);
  const Dataset d2(y2, w);
  const ThetaEstimate theta2 = memv::als_estimate(d2, em);
  CHECK(memv::suggest_sigma0(d2, theta2) == doctest::Approx(0.0));

  // Requires more observations than covariates.
  const Dataset d3(y.head(1), w.topRows(1));
  CHECK_THROWS_AS(memv::suggest_sigma0(d3, theta), memv::data_error);
}
