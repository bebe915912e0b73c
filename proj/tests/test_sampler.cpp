#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "critfield/gaussian.hpp"
#include "critfield/sampler.hpp"

using namespace critfield;

namespace {

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}
Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

std::string dump(const FieldSample& f) {
  std::ostringstream os;
  f.write_coefficients(os);
  return os.str();
}

}  // namespace

TEST_CASE("constant sample") {
  const auto spec = LatticeSpectrum::build(Amplitude::gaussian(1.0), 2, 8.0).first_modes(0);
  const auto f = FieldSample::draw(spec, 5);
  const double c = f.value(vec2(0.1, 0.2));
  CHECK(c == doctest::Approx(f.A0() / 8.0).epsilon(1e-14));
  for (const Vec& t : {vec2(0.0, 0.0), vec2(0.3, 0.9), vec2(0.77, 0.01)}) {
    const Jet j = f.eval_jet(t, 2);
    CHECK(j.value == doctest::Approx(c));
    CHECK(j.grad.norm() == 0.0);
    CHECK(j.hess.norm() == 0.0);
  }
  for (double v : f.grid_values(8)) CHECK(v == doctest::Approx(c).epsilon(1e-14));
}

TEST_CASE("determinism and refinement") {
  const auto a = Amplitude::gaussian(1.0);
  const auto spec = LatticeSpectrum::build(a, 2, 8.0);
  CHECK(dump(FieldSample::draw(spec, 42)) == dump(FieldSample::draw(spec, 42)));
  CHECK(dump(FieldSample::draw(spec, 42)) != dump(FieldSample::draw(spec, 43)));

  // Enlarging the spectrum keeps the draws of the shared modes.
  const auto coarse = FieldSample::draw(LatticeSpectrum::build(a, 1, 8.0, 1e-4), 9);
  const auto fine = FieldSample::draw(LatticeSpectrum::build(a, 1, 8.0, 1e-12), 9);
  REQUIRE(coarse.terms().size() < fine.terms().size());
  CHECK(coarse.A0() == fine.A0());
  for (std::size_t i = 0; i < coarse.terms().size(); ++i) {
    CHECK(coarse.terms()[i].A == fine.terms()[i].A);
    CHECK(coarse.terms()[i].B == fine.terms()[i].B);
  }
}

TEST_CASE("jets match finite differences") {
  const auto spec = LatticeSpectrum::build(Amplitude::gaussian(1.0), 2, 6.0);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto f = FieldSample::draw(spec, seed);
    for (int k = 0; k < 20; ++k) {
      const Vec t = vec2(u(gen), u(gen));
      const Jet j = f.eval_jet(t, 2);
      CHECK(j.hess(0, 1) == j.hess(1, 0));
      const double gscale = std::sqrt(f.grad_variance()), hscale = std::sqrt(f.hess_variance());
      for (int i = 0; i < 2; ++i) {
        Vec e = Vec::Zero(2);
        e[i] = 1e-6;
        const double fd = (f.value(t + e) - f.value(t - e)) / 2e-6;
        CHECK(std::fabs(fd - j.grad[i]) < 1e-5 * gscale);
        e[i] = 1e-4;
        const Jet jp = f.eval_jet(t + e, 1), jm = f.eval_jet(t - e, 1);
        for (int r = 0; r < 2; ++r)
          CHECK(std::fabs((jp.grad[r] - jm.grad[r]) / 2e-4 - j.hess(r, i)) < 1e-4 * hscale);
      }
    }
  }
  CHECK_THROWS_AS(FieldSample::draw(spec, 1).eval_jet(vec2(0, 0), 3), Error);
}

TEST_CASE("periodicity") {
  const auto f = FieldSample::draw(LatticeSpectrum::build(Amplitude::gaussian(1.0), 2, 8.0), 17);
  const Vec t = vec2(0.23, 0.61);
  CHECK(f.value(t + vec2(3.0, -2.0)) == doctest::Approx(f.value(t)).epsilon(1e-12));
  CHECK(reduce_torus(vec2(1.25, -0.25))[0] == doctest::Approx(0.25));
  CHECK(reduce_torus(vec2(1.25, -0.25))[1] == doctest::Approx(0.75));
}

TEST_CASE("grid values match pointwise evaluation") {
  const auto f = FieldSample::draw(LatticeSpectrum::build(Amplitude::gaussian(1.0), 2, 8.0), 23);
  const int n = 32;
  REQUIRE_FALSE(f.grid_aliases(n));
  const auto g = f.grid_values(n);
  const auto g2 = f.grid_values(2 * n);
  std::mt19937_64 gen(1);
  for (int k = 0; k < 10; ++k) {
    const int i = static_cast<int>(gen() % n), j = static_cast<int>(gen() % n);
    CHECK(std::fabs(g[i * n + j] - f.value(vec2(double(i) / n, double(j) / n))) < 1e-10);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) CHECK(std::fabs(g2[(2 * i) * 2 * n + 2 * j] - g[i * n + j]) < 1e-10);
  const auto d = f.grid_derivative(n, MultiIndex(2, {1, 1}));
  CHECK(std::fabs(d[5 * n + 7] - f.derivative(vec2(5.0 / n, 7.0 / n), MultiIndex(2, {1, 1}))) < 1e-8);
}

TEST_CASE("pointwise variance matches the kernel") {
  const double R = 8.0;
  const auto spec = LatticeSpectrum::build(Amplitude::gaussian(1.0), 1, R);
  const int n = 5000;
  double s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = FieldSample::draw(spec, 1000 + i).value(vec1(0.0));
    s2 += v * v;
    s4 += v * v * v * v;
  }
  const double var = s2 / n;
  const double se = std::sqrt((s4 / n - var * var) / n);
  const double K0 = kernel_deriv_lattice(spec, vec1(0.0), MultiIndex(1));
  CHECK(std::fabs(var - K0) < 4.0 * se);
}

TEST_CASE("covariance sign rule against sampled fields") {
  // Empirical covariance of (jet at 0, jet at z) against
  // cov(d^a Phi(x), d^b Phi(y)) = (-1)^{|a|} d^{a+b} K(y - x),
  // with Phi(x) = F(x / R) so every x-derivative carries a factor 1/R.
  const int m = 2;
  const double R = 6.0;
  const auto spec = LatticeSpectrum::build(Amplitude::gaussian(1.0), m, R);
  const Vec z = vec2(0.9, -0.5);
  std::vector<JetLabel> labels = jet_labels(m, 2, 0);
  for (auto& l : jet_labels(m, 2, 1)) labels.push_back(l);
  const GaussianSpec model = jet_covariance(LatticeKernel(spec), z, labels);
  const int d = model.size();

  const int n = 4000;
  Eigen::MatrixXd X(n, d);
  for (int s = 0; s < n; ++s) {
    const auto f = FieldSample::draw(spec, 5000 + s);
    for (int k = 0; k < d; ++k) {
      const Vec theta = labels[k].point == 0 ? Vec::Zero(m) : Vec(z / R);
      X(s, k) = f.derivative(theta, labels[k].alpha) * std::pow(R, -labels[k].alpha.order());
    }
  }
  const Eigen::MatrixXd emp = X.transpose() * X / n;
  int bad = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const double se = std::sqrt((model.cov(i, i) * model.cov(j, j) + model.cov(i, j) * model.cov(i, j)) / n);
      if (std::fabs(emp(i, j) - model.cov(i, j)) > 4.5 * se) {
        ++bad;
        MESSAGE(model.labels[i] << " " << model.labels[j] << " emp " << emp(i, j) << " model " << model.cov(i, j));
      }
    }
  CHECK(bad == 0);
}

TEST_CASE("injected fields") {
  FieldTerm t;
  t.ell = {1, 0, 0};
  t.c = 1.0;
  t.weight = 0.5;
  const auto f = FieldSample::from_terms(1, 1.0, 0.0, {t});
  CHECK(f.value(vec1(0.0)) == doctest::Approx(1.0));
  CHECK(f.value(vec1(0.5)) == doctest::Approx(-1.0));
  CHECK(f.eval_jet(vec1(0.25), 1).grad[0] == doctest::Approx(-2.0 * M_PI));
}
