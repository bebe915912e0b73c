#include <doctest.h>

#include <cmath>
#include <random>

#include "critfield/covariance.hpp"

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

}  // namespace

TEST_CASE("continuum kernel values") {
  const auto a = Amplitude::gaussian(1.0);
  CHECK(kernel_deriv_continuum(a, 1, vec1(0.0), MultiIndex(1)) ==
        doctest::Approx(0.19947114020071635).epsilon(1e-12));
  CHECK(kernel_deriv_continuum(a, 2, vec2(0.0, 0.0), MultiIndex(2, {1, 0})) == 0.0);
  CHECK(kernel_deriv_continuum(a, 3, Vec::Zero(3), MultiIndex(3, {2, 1, 0})) == 0.0);

  // Second derivative at z = 2 against central differences of K.
  const double h = 1e-3;
  auto K = [&](double z) { return kernel_deriv_continuum(a, 1, vec1(z), MultiIndex(1)); };
  const double fd = (K(2.0 + h) - 2.0 * K(2.0) + K(2.0 - h)) / (h * h);
  CHECK(std::fabs(kernel_deriv_continuum(a, 1, vec1(2.0), MultiIndex(1, {2})) - fd) < 1e-6);
}

TEST_CASE("continuum closed form matches quadrature") {
  for (int m = 1; m <= 2; ++m) {
    const ContinuumKernel k(Amplitude::gaussian(1.3), m);
    const Vec z = m == 1 ? vec1(0.7) : vec2(0.7, -1.1);
    for (const auto& alpha : multi_indices_up_to(m, 4)) {
      const double c = k.deriv(z, alpha);
      const double q = k.deriv_quadrature(z, alpha);
      CHECK(std::fabs(c - q) < 1e-10);
    }
  }
}

TEST_CASE("kernel parity and differences from the origin") {
  const ContinuumKernel cont(Amplitude::gaussian(1.0), 2);
  const LatticeKernel lat(LatticeSpectrum::build(Amplitude::gaussian(1.0), 2, 6.0));
  const Vec z = vec2(0.4, 1.3);
  for (const KernelSource* k : {static_cast<const KernelSource*>(&cont), static_cast<const KernelSource*>(&lat)}) {
    for (const auto& alpha : multi_indices_up_to(2, 4)) {
      const double sign = alpha.order() % 2 ? -1.0 : 1.0;
      CHECK(k->deriv(-z, alpha) == doctest::Approx(sign * k->deriv(z, alpha)).epsilon(1e-12));
      const double naive = k->deriv(z, alpha) - k->deriv(Vec::Zero(2), alpha);
      CHECK(std::fabs(k->deriv_minus_origin(z, alpha) - naive) < 1e-12);
    }
  }
  // Small separations: the difference keeps its relative accuracy.
  const Vec tiny = vec2(1e-5, 0.0);
  const MultiIndex a20(2, {2, 0});
  const double d = cont.deriv_minus_origin(tiny, a20);
  // d^2 K(z) - d^2 K(0) ~ d^4 K(0) z^2 / 2 for small z.
  const double lead = 0.5 * cont.deriv(Vec::Zero(2), MultiIndex(2, {4, 0})) * 1e-10;
  CHECK(d == doctest::Approx(lead).epsilon(1e-4));
}

TEST_CASE("lattice spectrum structure") {
  const auto spec = LatticeSpectrum::build(Amplitude::gaussian(1.0), 2, 8.0);
  CHECK(spec.zero_weight() == doctest::Approx(1.0 / 64.0));
  for (const auto& mode : spec.modes()) {
    CHECK(mode.weight >= 0.0);
    const bool positive = mode.ell[0] > 0 || (mode.ell[0] == 0 && mode.ell[1] > 0);
    CHECK(positive);
  }
  // Symmetry under the coordinate swap: count modes with l = (a, b) and (b, a) up to sign.
  std::size_t swapped = 0;
  for (const auto& p : spec.modes())
    for (const auto& q : spec.modes())
      if ((q.ell[0] == p.ell[1] && q.ell[1] == p.ell[0]) || (q.ell[0] == -p.ell[1] && q.ell[1] == -p.ell[0]))
        ++swapped;
  CHECK(swapped >= spec.modes().size());
  CHECK(spec.omitted_weight_bound() >= 0.0);
  CHECK(spec.omitted_weight_bound() < 1e-20);
}

TEST_CASE("lattice kernel") {
  const auto spec = LatticeSpectrum::build(Amplitude::gaussian(1.0), 1, 8.0);
  CHECK(kernel_deriv_lattice(spec, vec1(0.0), MultiIndex(1)) == doctest::Approx(spec.total_weight()));
  CHECK(spec.total_weight() > 0.0);
  CHECK(kernel_deriv_lattice(spec, vec1(0.0), MultiIndex(1, {3})) == 0.0);
  CHECK(std::fabs(kernel_deriv_lattice(spec, vec1(1.0), MultiIndex(1)) -
                  kernel_poisson(Amplitude::gaussian(1.0), 1, 8.0, vec1(1.0))) < 1e-10);
  // Period R in the rescaled coordinate.
  for (const auto& alpha : multi_indices_up_to(1, 4))
    CHECK(kernel_deriv_lattice(spec, vec1(1.3 + 8.0), alpha) ==
          doctest::Approx(kernel_deriv_lattice(spec, vec1(1.3), alpha)).epsilon(1e-10));
}

TEST_CASE("Poisson identity on random points") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto a = Amplitude::gaussian(1.0);
  for (int m = 1; m <= 2; ++m) {
    for (double R : {4.0, 8.0}) {
      const auto spec = LatticeSpectrum::build(a, m, R);
      for (int i = 0; i < 10; ++i) {
        Vec z(m);
        for (int j = 0; j < m; ++j) z[j] = R * u(gen);
        CHECK(std::fabs(kernel_deriv_lattice(spec, z, MultiIndex(m)) - kernel_poisson(a, m, R, z)) < 1e-9);
      }
    }
  }
  // Compact amplitude: the lattice sum is exact inside the support.
  const auto b = Amplitude::bump(2.0);
  const auto spec = LatticeSpectrum::build(b, 1, 8.0);
  CHECK(std::fabs(kernel_deriv_lattice(spec, vec1(0.6), MultiIndex(1)) - kernel_poisson(b, 1, 8.0, vec1(0.6))) < 1e-9);
}

TEST_CASE("kernel gap bound dominates the observed gap") {
  const auto a = Amplitude::gaussian(1.0);
  const ContinuumKernel cont(a, 1);
  const double r0 = 0.9;
  const int ell = 2;
  const double p = 3.0;
  double prev_gap = INFINITY, prev_bound = INFINITY;
  for (double R : {4.0, 8.0, 16.0}) {
    const LatticeKernel lat(LatticeSpectrum::build(a, 1, R));
    double gap = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const Vec x = vec1(R * r0 * (i / 200.0 - 0.5));
      for (const auto& alpha : multi_indices_up_to(1, ell))
        gap = std::max(gap, std::fabs(lat.deriv(x, alpha) - cont.deriv(x, alpha)));
    }
    const double bound = kernel_gap_bound(a, 1, R, r0, ell, p);
    CHECK(gap <= bound);
    CHECK(bound < prev_bound);
    CHECK(gap < prev_gap);
    prev_gap = gap;
    prev_bound = bound;
  }
  CHECK_THROWS_AS(kernel_gap_bound(a, 2, 8.0, 0.9, 2, 1.5), Error);
}

TEST_CASE("multi-index enumeration") {
  CHECK(multi_indices_up_to(1, 4).size() == 5);
  CHECK(multi_indices_up_to(2, 4).size() == 15);
  CHECK(multi_indices_up_to(3, 2).size() == 10);
  CHECK(multi_indices_up_to(2, 2)[0].order() == 0);
}
