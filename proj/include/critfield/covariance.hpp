#pragma once

#include <memory>
#include <string>
#include <vector>

#include "critfield/amplitude.hpp"
#include "critfield/types.hpp"

namespace critfield {

/// Largest derivative order handled by the kernel routines.
inline constexpr int kMaxKernelOrder = 4;

/// One retained frequency of the torus field with l > 0 in lexicographic
/// order (first nonzero coordinate positive).
struct LatticeMode {
  LatticeVec ell{};
  Vec k;              ///< wave vector 2 pi l / R in the rescaled coordinates
  double amplitude;   ///< a(|2 pi l| / R)
  double weight;      ///< R^{-m} a(|2 pi l| / R)^2
};

/// Truncated discrete spectral measure of the rescaled torus field: every l in
/// Z^m with |2 pi l| / R <= truncation_radius(eps_trunc), stored as the zero
/// mode plus the half lattice l > 0.
class LatticeSpectrum {
 public:
  static constexpr double kDefaultEps = 1e-12;

  static LatticeSpectrum build(const Amplitude& amp, int m, double R,
                               double eps_trunc = kDefaultEps);

  int dim() const { return m_; }
  double R() const { return R_; }
  double eps_trunc() const { return eps_; }
  double cutoff() const { return cutoff_; }
  const Amplitude& amplitude() const { return amp_; }

  /// R^{-m}; the l = 0 weight (a(0) = 1). Zero after drop_zero_mode().
  double zero_weight() const { return zero_weight_; }
  const std::vector<LatticeMode>& modes() const { return modes_; }
  /// Largest |l_j| over retained modes and coordinates.
  int max_index() const;
  /// Total retained weight, i.e. K^R(0).
  double total_weight() const;
  /// Upper bound on the spectral weight dropped by truncation.
  double omitted_weight_bound() const { return omitted_bound_; }

  /// Copy keeping the zero mode and the first n half-lattice modes (modes are
  /// ordered by |l|, then lexicographically).
  LatticeSpectrum first_modes(std::size_t n) const;

 private:
  LatticeSpectrum(Amplitude amp) : amp_(std::move(amp)) {}
  Amplitude amp_;
  int m_ = 1;
  double R_ = 1.0;
  double eps_ = kDefaultEps;
  double cutoff_ = 0.0;
  double zero_weight_ = 0.0;
  double omitted_bound_ = 0.0;
  std::vector<LatticeMode> modes_;
};

/// Stationary covariance kernel K with derivatives up to order 4.
class KernelSource {
 public:
  virtual ~KernelSource() = default;
  virtual int dim() const = 0;
  /// d^alpha K(z).
  virtual double deriv(const Vec& z, const MultiIndex& alpha) const = 0;
  /// d^alpha K(z) - d^alpha K(0); overridden where the difference can be
  /// formed without cancellation.
  virtual double deriv_minus_origin(const Vec& z, const MultiIndex& alpha) const {
    return deriv(z, alpha) - deriv(Vec::Zero(z.size()), alpha);
  }
  virtual std::string describe() const = 0;
};

/// Continuum kernel K(z) = (2 pi)^{-m} \int e^{i<xi,z>} a(|xi|)^2 dxi.
class ContinuumKernel final : public KernelSource {
 public:
  ContinuumKernel(Amplitude amp, int m);
  int dim() const override { return m_; }
  double deriv(const Vec& z, const MultiIndex& alpha) const override;
  double deriv_minus_origin(const Vec& z, const MultiIndex& alpha) const override;
  std::string describe() const override;
  const Amplitude& amplitude() const { return amp_; }

  /// Quadrature path, available for every amplitude kind (gaussian included,
  /// which otherwise uses the closed form).
  double deriv_quadrature(const Vec& z, const MultiIndex& alpha) const;

 private:
  double quadrature(const Vec& z, const MultiIndex& alpha, bool minus_origin) const;
  Amplitude amp_;
  int m_;
};

/// Torus kernel K^R(z) = sum_l R^{-m} a(|2 pi l|/R)^2 cos(<2 pi l / R, z>).
class LatticeKernel final : public KernelSource {
 public:
  explicit LatticeKernel(LatticeSpectrum spec) : spec_(std::move(spec)) {}
  int dim() const override { return spec_.dim(); }
  double deriv(const Vec& z, const MultiIndex& alpha) const override;
  double deriv_minus_origin(const Vec& z, const MultiIndex& alpha) const override;
  std::string describe() const override;
  const LatticeSpectrum& spectrum() const { return spec_; }

 private:
  LatticeSpectrum spec_;
};

double kernel_deriv_continuum(const Amplitude& amp, int m, const Vec& z, const MultiIndex& alpha);
double kernel_deriv_lattice(const LatticeSpectrum& spec, const Vec& z, const MultiIndex& alpha);

/// Image sum sum_k K(Rk - z) truncated where the certified tail drops below
/// 1e-14.
double kernel_poisson(const Amplitude& amp, int m, double R, const Vec& z);

/// Explicit upper bound on ||K^R - K||_{C^ell(RB)}, B = [-r0/2, r0/2]^m,
/// behaving like C R^{-p}. Requires p > m, R > 2, r0 in (0,1).
double kernel_gap_bound(const Amplitude& amp, int m, double R, double r0, int ell, double p);

/// sum_{|alpha| <= 4} |d^alpha K(z)|.
double kernel_T(const KernelSource& kernel, const Vec& z);
double T_R(const LatticeSpectrum& spec, const Vec& z);

/// All multi-indices of dimension m with order <= max_order, graded then
/// reverse-lexicographic.
std::vector<MultiIndex> multi_indices_up_to(int m, int max_order);

/// Certified decay of the continuum kernel and its derivatives.
class KernelDecay {
 public:
  virtual ~KernelDecay() = default;
  /// Upper bound for max_{|alpha| <= ell} |d^alpha K(y)| over |y|_inf >= rho.
  virtual double sup_beyond(int ell, double rho) const = 0;
  /// C with max_{|alpha| <= ell} |d^alpha K(y)| <= C |y|_inf^{-p} for all y.
  virtual double schwartz_constant(int ell, double p) const = 0;

  /// Gaussian and bump amplitudes carry certificates; tables do not.
  static std::unique_ptr<KernelDecay> make(const Amplitude& amp, int m);
};

}  // namespace critfield
