#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "critfield/sampler.hpp"
#include "critfield/types.hpp"

namespace critfield {

struct FinderOptions {
  /// Grid points per dimension; raised automatically to the correlation-length
  /// and Nyquist floors. 0 means "automatic only".
  int grid_n = 0;
  /// Relative to the gradient scale sqrt(Var d_1 F); converged when
  /// |grad F| <= newton_tol * scale.
  double newton_tol = 1e-10;
  double dedup_tol = 1e-6;
  int max_newton_iter = 50;
  /// Relative degeneracy threshold on |det Hess| against std(d_11 F)^m.
  double hess_degeneracy_tol = 1e-10;
};

struct CriticalPoint {
  Vec theta;
  double grad_residual = 0.0;
  double hess_det = 0.0;
  int morse_index = 0;
  bool degenerate = false;
};

struct FinderDiagnostics {
  int grid_n = 0;
  long seeds = 0;
  long newton_failures = 0;
  long degenerate = 0;
  bool aliased = false;
};

class CountingMeasure {
 public:
  CountingMeasure() = default;
  CountingMeasure(int m, double R, std::vector<CriticalPoint> pts, FinderDiagnostics diag)
      : m_(m), R_(R), points_(std::move(pts)), diag_(diag) {}

  int dim() const { return m_; }
  double R() const { return R_; }
  const std::vector<CriticalPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const FinderDiagnostics& diagnostics() const { return diag_; }
  bool morse() const { return diag_.degenerate == 0; }
  /// sum over points of (-1)^index.
  int euler_characteristic() const;
  /// Number of points with the given Morse index.
  int count_index(int index) const;

  /// CSV: theta components, residual, det, index, degenerate.
  void write_csv(std::ostream& os) const;

 private:
  int m_ = 1;
  double R_ = 1.0;
  std::vector<CriticalPoint> points_;
  FinderDiagnostics diag_;
};

/// Test functions on the torus, with distances taken in the torus metric.
class TestFunction {
 public:
  enum class Kind { bump, indicator, full, zero };

  /// (1 - (|x - c| / r0)^2)^3 on |x - c| < r0; r0 in (0, 1/2).
  static TestFunction bump(const Vec& center, double r0);
  /// Indicator of the box [lo, hi) (coordinates in [0, 1]).
  static TestFunction indicator(const Vec& lo, const Vec& hi);
  static TestFunction full(int m);
  static TestFunction zero(int m);
  /// "bump(r0)", "bump(r0, c1, ..., cm)", "indicator(full)", "box(lo1,hi1,...)",
  /// "zero".
  static TestFunction parse(const std::string& descriptor, int m);

  Kind kind() const { return kind_; }
  int dim() const { return m_; }
  double radius() const { return r0_; }
  std::string describe() const;

  double operator()(const Vec& theta) const;
  /// \int_{T^m} f and \int_{T^m} f^2.
  double integral() const;
  double integral_sq() const;

 private:
  Kind kind_ = Kind::full;
  int m_ = 1;
  Vec a_, b_;
  double r0_ = 0.0;
};

/// Grid resolution used for a sample: the larger of the requested size, four
/// nodes per correlation length and the Nyquist size of the retained modes.
int auto_grid_size(const FieldSample& sample, int requested);

CountingMeasure find_critical_points(const FieldSample& sample, const FinderOptions& opt);

/// Independent m = 1 count from sign changes of F' on a periodic grid.
int brute_force_count_1d(const FieldSample& sample, int grid_n);

/// Z(f) = sum over critical points of f(theta).
double pair_measure(const CountingMeasure& measure, const TestFunction& f);

}  // namespace critfield
