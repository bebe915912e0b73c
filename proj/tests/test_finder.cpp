#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "critfield/critical_finder.hpp"

using namespace critfield;

namespace {

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

FieldTerm cos_term(int l0, int l1) {
  FieldTerm t;
  t.ell = {l0, l1, 0};
  t.c = 1.0;
  t.weight = 0.5;
  return t;
}

}  // namespace

TEST_CASE("separable cosine in two dimensions") {
  const auto f = FieldSample::from_terms(2, 1.0, 0.0, {cos_term(1, 0), cos_term(0, 1)});
  const auto cm = find_critical_points(f, FinderOptions{});
  REQUIRE(cm.size() == 4);
  std::vector<int> idx;
  for (const auto& p : cm.points()) {
    idx.push_back(p.morse_index);
    for (int i = 0; i < 2; ++i) {
      const double d = std::min(std::fabs(p.theta[i]), std::fabs(p.theta[i] - 0.5));
      CHECK(std::min(d, std::fabs(p.theta[i] - 1.0)) < 1e-9);
    }
    CHECK_FALSE(p.degenerate);
  }
  std::sort(idx.begin(), idx.end());
  CHECK(idx == std::vector<int>{0, 1, 1, 2});
  CHECK(cm.euler_characteristic() == 0);
}

TEST_CASE("cosine on the circle") {
  const auto f = FieldSample::from_terms(1, 1.0, 0.0, {cos_term(1, 0)});
  const auto cm = find_critical_points(f, FinderOptions{});
  REQUIRE(cm.size() == 2);
  std::vector<double> th;
  for (const auto& p : cm.points()) th.push_back(std::fmod(p.theta[0] + 1e-12, 1.0));
  std::sort(th.begin(), th.end());
  CHECK(th[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(th[1] == doctest::Approx(0.5));
  CHECK(brute_force_count_1d(f, 64) == 2);

  const auto bump = TestFunction::bump(vec1(0.0), 0.25);
  CHECK(pair_measure(cm, bump) == doctest::Approx(1.0));
  CHECK(pair_measure(cm, TestFunction::full(1)) == 2.0);
  CHECK(pair_measure(cm, TestFunction::bump(vec1(0.25), 0.1)) == 0.0);
  CHECK(pair_measure(cm, TestFunction::zero(1)) == 0.0);
}

TEST_CASE("constant field has no isolated critical points to count") {
  const auto f = FieldSample::from_terms(1, 1.0, 2.0, {});
  CHECK(brute_force_count_1d(f, 64) == 0);
}

TEST_CASE("Newton count equals sign-change count") {
  for (double R : {8.0, 16.0}) {
    const auto spec = LatticeSpectrum::build(Amplitude::gaussian(1.0), 1, R);
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const auto f = FieldSample::draw(spec, seed);
      const auto cm = find_critical_points(f, FinderOptions{});
      const int bf = brute_force_count_1d(f, 0);
      CHECK(static_cast<int>(cm.size()) == bf);
      // Maxima and minima alternate on the circle.
      CHECK(cm.count_index(0) == cm.count_index(1));
      for (const auto& p : cm.points()) CHECK(p.grad_residual <= 1e-10 * std::sqrt(f.grad_variance()));
    }
  }
}

TEST_CASE("Euler characteristic of the torus") {
  const auto spec = LatticeSpectrum::build(Amplitude::gaussian(1.0), 2, 8.0);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto cm = find_critical_points(FieldSample::draw(spec, seed), FinderOptions{});
    if (!cm.morse()) continue;
    CHECK(cm.euler_characteristic() == 0);
    CHECK(cm.size() % 2 == 0);
  }
}

TEST_CASE("deduplication and refinement") {
  const auto spec = LatticeSpectrum::build(Amplitude::gaussian(1.0), 2, 8.0);
  int same = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto f = FieldSample::draw(spec, seed);
    FinderOptions a;
    const auto c1 = find_critical_points(f, a);
    a.grid_n = 2 * c1.diagnostics().grid_n;
    const auto c2 = find_critical_points(f, a);
    if (c1.size() == c2.size()) ++same;
    for (std::size_t i = 0; i < c1.size(); ++i)
      for (std::size_t j = i + 1; j < c1.size(); ++j) {
        Vec d = c1.points()[i].theta - c1.points()[j].theta;
        for (int k = 0; k < 2; ++k) d[k] -= std::round(d[k]);
        CHECK(d.norm() >= 1e-6);
      }
  }
  CHECK(same >= 9);
}

TEST_CASE("test functions") {
  const auto b1 = TestFunction::bump(vec1(0.0), 0.25);
  CHECK(b1.integral() == doctest::Approx(0.22857142857142854).epsilon(1e-10));
  CHECK(b1.integral_sq() == doctest::Approx(0.1704961704961705).epsilon(1e-10));
  const auto b2 = TestFunction::parse("bump(0.25)", 2);
  CHECK(b2.integral() == doctest::Approx(0.04908738521234052).epsilon(1e-10));
  CHECK(b2.integral_sq() == doctest::Approx(0.028049934407051717).epsilon(1e-10));
  // Torus distance: a bump centred at 0 sees points near 1.
  CHECK(b1(vec1(0.95)) == doctest::Approx(std::pow(1.0 - 0.04, 3)));
  CHECK(TestFunction::parse("indicator(full)", 2).integral() == 1.0);
  CHECK(TestFunction::parse("box(0,0.5)", 1).integral() == doctest::Approx(0.5));
  CHECK_THROWS_AS(TestFunction::bump(vec1(0.0), 0.6), Error);
}
