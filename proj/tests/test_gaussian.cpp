#include <doctest.h>

#include <cmath>
#include <random>

#include "critfield/gaussian.hpp"

using namespace critfield;

namespace {

// E|N(0,1)| and E|h11 h22 - h12^2| for iid standard normal entries
// (tensor Gauss-Hermite quadrature).
constexpr double kHalfNormalMean = 0.7978845608028652;
constexpr double kAbsDetIid2 = 1.3320998627751732;

}  // namespace

TEST_CASE("regression covariance") {
  Eigen::MatrixXd s22(2, 2), s11(2, 2), s21 = Eigen::MatrixXd::Zero(2, 2);
  s22 << 2.0, 0.3, 0.3, 1.0;
  s11 << 1.0, 0.2, 0.2, 3.0;
  CHECK((regression_covariance(s22, s21, s11) - s22).norm() == 0.0);

  Eigen::MatrixXd one(1, 1), rho(1, 1);
  one << 1.0;
  rho << 0.6;
  CHECK(regression_covariance(one, rho, one)(0, 0) == doctest::Approx(1.0 - 0.36));

  Eigen::MatrixXd sing(2, 2);
  sing << 1.0, 1.0, 1.0, 1.0;
  try {
    regression_covariance(s22, s21, sing);
    FAIL("expected degenerate conditioning");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate);
    CHECK(std::string(e.what()).find("degenerate conditioning") != std::string::npos);
  }
}

TEST_CASE("regression covariance against sampled conditioning") {
  // Random SPD joint covariance of (X1, X2), each 1-dimensional here; the
  // residual of X2 after least squares on X1 has the conditional covariance.
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd B(2, 2);
  for (int i = 0; i < 4; ++i) B(i / 2, i % 2) = nd(gen);
  const Eigen::MatrixXd S = B * B.transpose() + 0.5 * Eigen::MatrixXd::Identity(2, 2);
  const double expected = regression_covariance(S.block(1, 1, 1, 1), S.block(1, 0, 1, 1), S.block(0, 0, 1, 1))(0, 0);
  const Eigen::MatrixXd L = S.llt().matrixL();
  const int n = 200000;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int k = 0; k < n; ++k) {
    Eigen::Vector2d z(nd(gen), nd(gen));
    const Eigen::Vector2d x = L * z;
    sxx += x[0] * x[0];
    sxy += x[0] * x[1];
    syy += x[1] * x[1];
  }
  const double emp = (syy - sxy * sxy / sxx) / n;
  CHECK(std::fabs(emp - expected) < 4.0 * expected * std::sqrt(2.0 / n));
}

TEST_CASE("psd repair") {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 1.0, 1.0, 1.0 - 1e-12;
  const Eigen::MatrixXd r = psd_repair(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
  CHECK(es.eigenvalues().minCoeff() >= 0.0);
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.0, 0.0, -0.1;
  CHECK_THROWS_AS(psd_repair(bad), Error);
  const Eigen::MatrixXd F = psd_factor(r);
  CHECK((F * F.transpose() - r).norm() < 1e-12);
}

TEST_CASE("expected absolute determinant") {
  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  const auto e1 = expected_abs_det(one, 1, 200000, 1);
  CHECK(std::fabs(e1.value - kHalfNormalMean) < 4.0 * e1.std_error);
  CHECK(e1.std_error > 0.0);

  Eigen::MatrixXd four(1, 1);
  four << 4.0;
  const auto e4 = expected_abs_det(four, 1, 200000, 1);
  CHECK(e4.value == doctest::Approx(2.0 * e1.value).epsilon(1e-12));

  const auto z = expected_abs_det(Eigen::MatrixXd::Zero(3, 3), 2, 10000, 1);
  CHECK(z.value == 0.0);
  CHECK(z.std_error == 0.0);

  const auto e2 = expected_abs_det(Eigen::MatrixXd::Identity(3, 3), 2, 200000, 2);
  CHECK(std::fabs(e2.value - kAbsDetIid2) < 3.0 * e2.std_error);
}

TEST_CASE("symmetric packing and labels") {
  const double e[] = {1.0, 2.0, 3.0};
  const Mat h = unpack_symmetric(e, 2);
  CHECK(h(0, 1) == 2.0);
  CHECK(h(1, 0) == 2.0);
  CHECK(h(1, 1) == 3.0);
  CHECK(sym_size(3) == 6);
  CHECK(jet_labels(2, 2, 0).size() == 6);
  CHECK(jet_labels(2, 1, 1)[1].name() == "y:d1");
  CHECK(hessian_labels(2, 0)[1].name() == "x:H12");
}
