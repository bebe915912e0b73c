#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <vector>

#include "critfield/covariance.hpp"
#include "critfield/types.hpp"

namespace critfield {

/// One trigonometric term c cos(2 pi <l, theta>) + s sin(2 pi <l, theta>).
struct FieldTerm {
  LatticeVec ell{};
  double c = 0.0;
  double s = 0.0;
  /// Expected value of (c^2 + s^2) / 2 for random samples; (c^2 + s^2) / 2
  /// itself for injected fields. Feeds the scale heuristics.
  double weight = 0.0;
  /// Raw standard-normal draws (A_l, B_l); zero for injected fields.
  double A = 0.0;
  double B = 0.0;
};

/// Value, gradient and Hessian in torus coordinates theta.
struct Jet {
  double value = 0.0;
  Vec grad;
  Mat hess;
};

/// One realization of the random Fourier series on the torus R^m / Z^m.
class FieldSample {
 public:
  /// Coefficients keyed by (seed, l) so a mode's draw never depends on which
  /// other modes are retained.
  static FieldSample draw(const LatticeSpectrum& spec, std::uint64_t seed);

  /// Deterministic field c0 + sum of the given terms; R only sets the scale
  /// metadata.
  static FieldSample from_terms(int m, double R, double c0, std::vector<FieldTerm> terms);

  int dim() const { return m_; }
  double R() const { return R_; }
  std::uint64_t seed() const { return seed_; }
  double c0() const { return c0_; }
  double A0() const { return A0_; }
  const std::vector<FieldTerm>& terms() const { return terms_; }
  int max_index() const { return max_index_; }
  /// Certified bound on the variance of the discarded tail of the series.
  double truncation_variance_bound() const { return tail_var_; }

  /// Variance of d_1 F and d_11 F in theta coordinates implied by the term
  /// weights (identical in every coordinate for radial spectra).
  double grad_variance() const;
  double hess_variance() const;

  double value(const Vec& theta) const;
  Jet eval_jet(const Vec& theta, int order) const;
  /// d^alpha F(theta) for any |alpha|.
  double derivative(const Vec& theta, const MultiIndex& alpha) const;

  /// Values of d^alpha F on the grid {0, 1/n, ..., (n-1)/n}^m in row-major
  /// order (last coordinate fastest).
  std::vector<double> grid_derivative(int n, const MultiIndex& alpha) const;
  std::vector<double> grid_values(int n) const { return grid_derivative(n, MultiIndex(m_)); }
  /// True when n is too small to resolve every retained frequency.
  bool grid_aliases(int n) const { return n < 2 * max_index() + 1; }

  /// CSV coefficient dump: l components, A, B, c, s.
  void write_coefficients(std::ostream& os) const;
  /// CSV grid dump: theta components, value.
  void write_grid(std::ostream& os, int n) const;

 private:
  void update_max_index();
  int m_ = 1;
  int max_index_ = 0;
  double R_ = 1.0;
  std::uint64_t seed_ = 0;
  double A0_ = 0.0;
  double c0_ = 0.0;
  double tail_var_ = 0.0;
  std::vector<FieldTerm> terms_;
};

/// Reduces each coordinate into [0, 1).
Vec reduce_torus(const Vec& theta);

}  // namespace critfield
