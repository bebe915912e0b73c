#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "critfield/types.hpp"

namespace critfield {

/// An even, rapidly decaying weight a with a(0) = 1. The field's spectral
/// density is w(xi) = a(|xi|)^2.
///
/// Three kinds are supported:
///   gaussian(s)  a(x) = exp(-(x/s)^2)
///   bump(r)      a(x) = exp(1 - 1/(1 - (x/r)^2)) on |x| < r, zero outside
///   table        linear interpolation of (x_i, v_i) with x_0 = 0, v_0 = 1;
///                beyond the last node the value continues as
///                v_last * exp(-kappa (x^2 - x_last^2)) when a tail exponent
///                kappa is declared, and as 0 otherwise (uncertified).
class Amplitude {
 public:
  enum class Kind { gaussian, bump, table };

  static Amplitude gaussian(double s);
  static Amplitude bump(double radius);
  static Amplitude table(std::vector<double> abscissae, std::vector<double> values,
                         std::optional<double> tail_exponent);
  /// Two-column CSV (abscissa, value); lines starting with '#' and a
  /// non-numeric header line are skipped.
  static Amplitude load_table(const std::string& path, std::optional<double> tail_exponent);
  /// Parses "gaussian(s)", "bump(r)" or "table(path[, kappa])".
  static Amplitude parse(std::string_view descriptor);

  Kind kind() const;
  /// Scale parameter: s for gaussian, the support radius for bump, the last
  /// abscissa for tables.
  double scale() const;
  std::string describe() const;

  /// a(x); evaluated on |x| so evenness holds bit for bit.
  double operator()(double x) const;

  /// w(xi) = a(|xi|)^2.
  double spectral_weight(const Vec& xi) const;

  /// Smallest certified L with |a(x)| <= eps for all |x| >= L.
  double truncation_radius(double eps) const;

  /// (2 pi)^{-m} \int_{R^m} xi^alpha w(xi) dxi. Odd multi-indices return
  /// exactly 0. Gaussian amplitudes use the closed form unless
  /// force_quadrature is set; everything else uses adaptive radial quadrature
  /// with relative tolerance 1e-10.
  double spectral_moment(const MultiIndex& alpha, bool force_quadrature = false) const;

  /// \int_0^infinity r^power a(r)^2 dr by adaptive quadrature.
  double radial_integral(int power) const;

  /// Upper end of the region where a(x)^2 is numerically nonzero; used as the
  /// integration limit for compactly supported or tabulated amplitudes.
  double effective_support() const;

 private:
  struct Gaussian {
    double s;
  };
  struct Bump {
    double radius;
  };
  struct Table {
    std::vector<double> x;
    std::vector<double> v;
    std::optional<double> kappa;
    std::string source;
  };
  explicit Amplitude(std::variant<Gaussian, Bump, Table> rep) : rep_(std::move(rep)) {}

  std::variant<Gaussian, Bump, Table> rep_;
};

/// Surface area of the unit sphere S^{m-1} in R^m.
double sphere_area(int m);

/// \int_{S^{m-1}} nu^alpha dnu for a multi-index with all entries even.
double sphere_monomial(const MultiIndex& alpha);

}  // namespace critfield
