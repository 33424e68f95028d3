#include "memv/types.hpp"

#include <limits>

#include "doctest.h"
#include "memv/errors.hpp"

using memv::Dataset;
using memv::ErrorModel;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("dataset stores data and reports shape") {
  Eigen::MatrixXd w(3, 2);
  w << 1, 2, 3, 4, 5, 6;
  const Dataset d(vec({1, 2, 3}), w, {"a", "b"});
  CHECK(d.n() == 3);
  CHECK(d.m() == 2);
  CHECK(d.y()(1) == 2.0);
  CHECK(d.w()(2, 1) == 6.0);
  CHECK(d.column_names().at(1) == "b");
}

TEST_CASE("dataset rejects malformed input") {
  Eigen::MatrixXd w(3, 1);
  w << 1, 2, 3;
  CHECK_THROWS_AS(Dataset(vec({1, 2}), w), memv::data_error);
  CHECK_THROWS_AS(Dataset(Eigen::VectorXd(), Eigen::MatrixXd()),
                  memv::data_error);
  CHECK_THROWS_AS(Dataset(vec({1, 2, 3}), Eigen::MatrixXd(3, 0)),
                  memv::data_error);

  Eigen::VectorXd bad_y = vec({1, std::numeric_limits<double>::quiet_NaN(), 3});
  CHECK_THROWS_AS(Dataset(bad_y, w), memv::data_error);

  Eigen::MatrixXd bad_w = w;
  bad_w(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Dataset(vec({1, 2, 3}), bad_w), memv::data_error);

  CHECK_THROWS_AS(Dataset(vec({1, 2, 3}), w, {"a", "b"}), memv::data_error);
  CHECK_NOTHROW(Dataset(vec({1, 2, 3}), w));
}

TEST_CASE("error model accepts PSD matrices and symmetrizes rounding noise") {
  Eigen::MatrixXd s(2, 2);
  s << 1.0, 0.1 + 5e-12, 0.1, 0.5;
  const ErrorModel em(s, 0.25);
  CHECK(em.m() == 2);
  CHECK(em.sigma0_sq() == 0.25);
  CHECK(em.s()(0, 1) == em.s()(1, 0));
  CHECK(em.s()(0, 1) == doctest::Approx(0.1).epsilon(1e-9));

  // Zero rows and columns stand for error-free covariates.
  Eigen::MatrixXd with_zero(2, 2);
  with_zero << 0.04, 0, 0, 0;
  CHECK_NOTHROW(ErrorModel(with_zero, 1.0));
  CHECK_NOTHROW(ErrorModel(Eigen::MatrixXd::Zero(3, 3)));
}

TEST_CASE("error model rejects invalid matrices") {
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.3, 0.1, 0.5;
  CHECK_THROWS_AS(ErrorModel(asym, 1.0), memv::data_error);

  CHECK_THROWS_AS(ErrorModel(Eigen::MatrixXd(2, 3), 1.0), memv::data_error);
  CHECK_THROWS_AS(ErrorModel(Eigen::MatrixXd(0, 0), 1.0), memv::data_error);

  Eigen::MatrixXd neg = Eigen::MatrixXd::Identity(2, 2);
  neg(1, 1) = -1e-9;
  CHECK_THROWS_AS(ErrorModel(neg, 1.0), memv::data_error);

  // An eigenvalue inside the PSD tolerance band is accepted.
  Eigen::MatrixXd near = Eigen::MatrixXd::Identity(2, 2);
  near(1, 1) = -5e-11;
  CHECK_NOTHROW(ErrorModel(near, 1.0));

  Eigen::MatrixXd nan_s = Eigen::MatrixXd::Zero(1, 1);
  nan_s(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ErrorModel(nan_s, 1.0), memv::data_error);

  CHECK_THROWS_AS(ErrorModel(Eigen::MatrixXd::Identity(1, 1), -0.5),
                  memv::data_error);
}

TEST_CASE("error categories map to distinct exception types") {
  CHECK_THROWS_AS(throw memv::usage_error("u"), std::runtime_error);
  CHECK_THROWS_AS(throw memv::data_error("d"), std::runtime_error);
  CHECK_THROWS_AS(throw memv::degeneracy_error("g"), std::runtime_error);
}
