#include "critfield/covariance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace critfield {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool lex_positive(const LatticeVec& l, int m) {
  for (int i = 0; i < m; ++i) {
    if (l[i] > 0) return true;
    if (l[i] < 0) return false;
  }
  return false;
}

/// d^n/dt^n cos(t) = cos(t + n pi/2), written without the phase shift.
inline double cos_deriv(int n, double c, double s) {
  switch (n & 3) {
    case 0: return c;
    case 1: return -s;
    case 2: return -c;
    default: return s;
  }
}

void check_order(const MultiIndex& alpha) {
  if (alpha.order() > kMaxKernelOrder)
    throw Error(ErrorCode::unsupported, "kernel derivatives are limited to order 4, got " +
                                            alpha.str());
}

/// Visits every l in [-J, J]^m.
template <class F>
void for_each_in_box(int m, int J, F&& f) {
  LatticeVec l{};
  for (int i = 0; i < m; ++i) l[i] = -J;
  for (;;) {
    f(l);
    int i = m - 1;
    while (i >= 0 && l[i] == J) {
      l[i] = -J;
      --i;
    }
    if (i < 0) return;
    ++l[i];
  }
}

/// Number of l in Z^m with |l|_inf == j.
double shell_count(int m, int j) {
  if (j == 0) return 1.0;
  return std::pow(2.0 * j + 1.0, m) - std::pow(2.0 * j - 1.0, m);
}

// ---------------------------------------------------------------------------
// Gaussian closed form. For a(x) = exp(-(x/s)^2),
//   K(z) = (8 pi)^{-m/2} s^m exp(-s^2 |z|^2 / 8),
// which factors over coordinates; derivatives are Hermite polynomials.

double hermite_phys(int n, double x) {
  double h0 = 1.0;
  if (n == 0) return h0;
  double h1 = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double h2 = 2.0 * x * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

double gaussian_kernel_deriv(double s, int m, const Vec& z, const MultiIndex& alpha) {
  const double a = s * s / 8.0;
  const double sa = std::sqrt(a);
  double r = std::pow(8.0 * std::numbers::pi, -0.5 * m) * std::pow(s, m);
  for (int i = 0; i < m; ++i) {
    const int n = alpha[i];
    const double t = z[i];
    const double sign = (n % 2) ? -1.0 : 1.0;
    r *= sign * std::pow(sa, n) * hermite_phys(n, sa * t) * std::exp(-a * t * t);
  }
  return r;
}

/// H_n(x) - H_n(0) for n <= 4, expanded so small x does not cancel.
double hermite_minus_origin(int n, double x) {
  const double x2 = x * x;
  switch (n) {
    case 0: return 0.0;
    case 1: return 2.0 * x;
    case 2: return 4.0 * x2;
    case 3: return x * (8.0 * x2 - 12.0);
    case 4: return x2 * (16.0 * x2 - 48.0);
  }
  throw Error(ErrorCode::unsupported, "kernel derivatives are limited to order 4");
}

/// d^alpha K(z) - d^alpha K(0) for the gaussian kernel. Each coordinate factor
/// g(t) = c H_n(sa t) e^{-a t^2} is differenced as
///   c [(H_n(sa t) - H_n(0)) e^{-a t^2} + H_n(0) expm1(-a t^2)]
/// and the product difference telescopes over coordinates.
double gaussian_kernel_deriv_minus_origin(double s, int m, const Vec& z, const MultiIndex& alpha) {
  const double a = s * s / 8.0;
  const double sa = std::sqrt(a);
  double at[kMaxDim], at0[kMaxDim], diff[kMaxDim];
  for (int i = 0; i < m; ++i) {
    const int n = alpha[i];
    const double t = z[i];
    const double c = ((n % 2) ? -1.0 : 1.0) * std::pow(sa, n);
    const double e = std::exp(-a * t * t);
    at[i] = c * hermite_phys(n, sa * t) * e;
    at0[i] = c * hermite_phys(n, 0.0);
    diff[i] = c * (hermite_minus_origin(n, sa * t) * e + hermite_phys(n, 0.0) * std::expm1(-a * t * t));
  }
  double sum = 0.0;
  for (int j = 0; j < m; ++j) {
    double term = diff[j];
    for (int i = 0; i < j; ++i) term *= at[i];
    for (int i = j + 1; i < m; ++i) term *= at0[i];
    sum += term;
  }
  return std::pow(8.0 * std::numbers::pi, -0.5 * m) * std::pow(s, m) * sum;
}

// ---------------------------------------------------------------------------
// Truncated Taylor arithmetic, used to bound derivatives of the bump spectral
// density for the decay certificate.

constexpr int kTaylorOrder = 14;
using Taylor = std::array<double, kTaylorOrder + 1>;

Taylor t_recip(const Taylor& a) {
  Taylor c{};
  c[0] = 1.0 / a[0];
  for (int n = 1; n <= kTaylorOrder; ++n) {
    double s = 0.0;
    for (int k = 1; k <= n; ++k) s += a[k] * c[n - k];
    c[n] = -s / a[0];
  }
  return c;
}

Taylor t_exp(const Taylor& a) {
  Taylor c{};
  c[0] = std::exp(a[0]);
  for (int n = 1; n <= kTaylorOrder; ++n) {
    double s = 0.0;
    for (int k = 1; k <= n; ++k) s += k * a[k] * c[n - k];
    c[n] = s / n;
  }
  return c;
}

/// Taylor coefficients in h of w(t0 + h, rest) for the bump
/// w = exp(2 - 2 / (1 - (t^2 + rest2) / r^2)).
Taylor bump_weight_series(double t0, double rest2, double radius) {
  const double r2 = radius * radius;
  Taylor u{};  // 1 - (t^2 + rest2)/r^2 as a polynomial in h
  u[0] = 1.0 - (t0 * t0 + rest2) / r2;
  u[1] = -2.0 * t0 / r2;
  u[2] = -1.0 / r2;
  Taylor e = t_recip(u);
  for (double& c : e) c *= -2.0;
  e[0] += 2.0;
  return t_exp(e);
}

class GaussianDecay final : public KernelDecay {
 public:
  GaussianDecay(double s, int m) : m_(m), a_(s * s / 8.0) {
    amp_ = std::pow(8.0 * std::numbers::pi, -0.5 * m) * std::pow(s, m);
  }

  double sup_beyond(int ell, double rho) const override {
    return level(ell) * std::exp(-0.5 * a_ * rho * rho);
  }

  double schwartz_constant(int ell, double p) const override {
    if (p <= 0.0) return level(ell);
    return level(ell) * std::pow(p / a_, 0.5 * p) * std::exp(-0.5 * p);
  }

 private:
  // |d^n exp(-a t^2)| <= a^{n/2} k_n exp(-a t^2 / 2) with Cramer's constant
  // k_n = 1.086435 2^{n/2} sqrt(n!) for n >= 1 and k_0 = 1.
  double factor(int n) const {
    if (n == 0) return 1.0;
    return std::pow(a_, 0.5 * n) * 1.086435 * std::pow(2.0, 0.5 * n) * std::sqrt(std::tgamma(n + 1.0));
  }
  double level(int ell) const {
    double best = 0.0;
    for (const auto& alpha : multi_indices_up_to(m_, ell)) {
      double v = amp_;
      for (int i = 0; i < m_; ++i) v *= factor(alpha[i]);
      best = std::max(best, v);
    }
    return best;
  }
  int m_;
  double a_;
  double amp_;
};

/// Integration by parts in xi_i:
///   |y_i|^q |d^alpha K(y)| <= (2 pi)^{-m} \int |d_{xi_i}^q (xi^alpha w(xi))| dxi.
/// The right side is bounded through Leibniz by the L1 norms W_k of d_1^k w,
/// computed once by tensor Gauss-Legendre quadrature over the support ball.
class BumpDecay final : public KernelDecay {
 public:
  BumpDecay(double radius, int m) : m_(m), radius_(radius) { compute_norms(); }

  double sup_beyond(int ell, double rho) const override {
    double best = constant(ell, 0);
    if (rho <= 0.0) return best;
    for (int q = 1; q <= kTaylorOrder; ++q) best = std::min(best, constant(ell, q) * std::pow(rho, -q));
    return best;
  }

  double schwartz_constant(int ell, double p) const override {
    const int q = static_cast<int>(std::ceil(p));
    if (q > kTaylorOrder)
      throw Error(ErrorCode::unsupported, "bump decay certificate limited to p <= 14");
    return std::max(constant(ell, 0), constant(ell, std::max(q, 0)));
  }

 private:
  void compute_norms() {
    // 1.05 covers the quadrature error of the absolute-value integrand.
    const int nodes = m_ == 1 ? 400 : (m_ == 2 ? 160 : 64);
    std::vector<double> x(nodes), w(nodes);
    // Gauss-Legendre on [-r, r] by composite midpoint-refined panels of the
    // fixed 20-point rule.
    const int per = 20;
    const int panels = nodes / per;
    const auto& gx = boost::math::quadrature::gauss<double, 20>::abscissa();
    const auto& gw = boost::math::quadrature::gauss<double, 20>::weights();
    std::vector<double> px, pw;
    for (int p = 0; p < panels; ++p) {
      const double lo = -radius_ + 2.0 * radius_ * p / panels;
      const double hi = lo + 2.0 * radius_ / panels;
      const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
      for (std::size_t j = 0; j < gx.size(); ++j) {
        const double wj = gw[j] * h;
        px.push_back(c + h * gx[j]);
        pw.push_back(wj);
        if (gx[j] != 0.0) {
          px.push_back(c - h * gx[j]);
          pw.push_back(wj);
        }
      }
    }
    norms_.fill(0.0);
    const std::size_t n = px.size();
    const double r2 = radius_ * radius_;
    auto accumulate = [&](double t, double rest2, double weight) {
      if (t * t + rest2 >= r2) return;
      const Taylor series = bump_weight_series(t, rest2, radius_);
      double fact = 1.0;
      for (int k = 0; k <= kTaylorOrder; ++k) {
        if (k > 0) fact *= k;
        norms_[k] += weight * std::fabs(series[k] * fact);
      }
    };
    if (m_ == 1) {
      for (std::size_t i = 0; i < n; ++i) accumulate(px[i], 0.0, pw[i]);
    } else if (m_ == 2) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) accumulate(px[i], px[j] * px[j], pw[i] * pw[j]);
    } else {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t k = 0; k < n; ++k)
            accumulate(px[i], px[j] * px[j] + px[k] * px[k], pw[i] * pw[j] * pw[k]);
    }
    for (double& v : norms_) v *= 1.05 * std::pow(kTwoPi, -m_);
  }

  /// max over |alpha| <= ell of the bound on sup |y|_inf^q |d^alpha K(y)|.
  double constant(int ell, int q) const {
    double best = 0.0;
    for (int ai = 0; ai <= ell; ++ai) {        // exponent of xi_i in xi^alpha
      for (int total = ai; total <= ell; ++total) {  // |alpha|
        double s = 0.0;
        double binom = 1.0, falling = 1.0;
        for (int j = 0; j <= std::min(q, ai); ++j) {
          if (j > 0) {
            binom = binom * (q - j + 1) / j;
            falling *= (ai - j + 1);
          }
          s += binom * falling * std::pow(radius_, total - j) * norms_[q - j];
        }
        best = std::max(best, s);
      }
    }
    return best;
  }

  int m_;
  double radius_;
  std::array<double, kTaylorOrder + 1> norms_{};
};

}  // namespace

std::vector<MultiIndex> multi_indices_up_to(int m, int max_order) {
  check_dimension(m);
  std::vector<MultiIndex> out;
  for (int order = 0; order <= max_order; ++order) {
    MultiIndex a(m);
    // enumerate compositions of `order` into m parts
    std::array<int, kMaxDim> e{};
    e[0] = order;
    for (;;) {
      for (int i = 0; i < m; ++i) a.set(i, e[i]);
      out.push_back(a);
      // next composition (reverse lexicographic)
      int i = m - 2;
      while (i >= 0 && e[i] == 0) --i;
      if (i < 0) break;
      --e[i];
      const int rest = e[m - 1] + 1;
      e[m - 1] = 0;
      e[i + 1] = rest;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

LatticeSpectrum LatticeSpectrum::build(const Amplitude& amp, int m, double R, double eps) {
  check_dimension(m);
  if (!(R > 0.0) || !std::isfinite(R))
    throw Error(ErrorCode::invalid_argument, "R must be positive");
  LatticeSpectrum s(amp);
  s.m_ = m;
  s.R_ = R;
  s.eps_ = eps;
  s.cutoff_ = amp.truncation_radius(eps);
  s.zero_weight_ = std::pow(R, -m);
  const int J = static_cast<int>(std::floor(s.cutoff_ * R / kTwoPi));
  for_each_in_box(m, J, [&](const LatticeVec& l) {
    if (!lex_positive(l, m)) return;
    Vec k(m);
    for (int i = 0; i < m; ++i) k[i] = kTwoPi * l[i] / R;
    const double kn = k.norm();
    if (kn > s.cutoff_) return;
    const double a = amp(kn);
    s.modes_.push_back(LatticeMode{l, k, a, s.zero_weight_ * a * a});
  });
  std::sort(s.modes_.begin(), s.modes_.end(), [m](const LatticeMode& x, const LatticeMode& y) {
    long nx = 0, ny = 0;
    for (int i = 0; i < m; ++i) {
      nx += static_cast<long>(x.ell[i]) * x.ell[i];
      ny += static_cast<long>(y.ell[i]) * y.ell[i];
    }
    if (nx != ny) return nx < ny;
    return x.ell < y.ell;
  });

  // Omitted weight: enumerate until the amplitude is below 1e-20, then add the
  // monotone shell remainder.
  double far = s.cutoff_;
  try {
    far = std::max(far, amp.truncation_radius(1e-20));
  } catch (const Error&) {
  }
  const int Jfar = static_cast<int>(std::ceil(far * R / kTwoPi)) + 1;
  double omitted = 0.0;
  if (static_cast<double>(std::pow(2.0 * Jfar + 1.0, m)) < 5e7) {
    for_each_in_box(m, Jfar, [&](const LatticeVec& l) {
      double kn2 = 0.0;
      for (int i = 0; i < m; ++i) kn2 += (kTwoPi * l[i] / R) * (kTwoPi * l[i] / R);
      const double kn = std::sqrt(kn2);
      if (kn <= s.cutoff_) return;
      const double a = amp(kn);
      omitted += s.zero_weight_ * a * a;
    });
  }
  for (int j = Jfar + 1; j <= Jfar + 400; ++j) {
    const double bound = 1e-20;  // |a| <= 1e-20 beyond `far`
    omitted += shell_count(m, j) * s.zero_weight_ * bound * bound;
  }
  s.omitted_bound_ = omitted;
  return s;
}

int LatticeSpectrum::max_index() const {
  int best = 0;
  for (const auto& md : modes_)
    for (int i = 0; i < m_; ++i) best = std::max(best, std::abs(md.ell[i]));
  return best;
}

double LatticeSpectrum::total_weight() const {
  double s = zero_weight_;
  for (const auto& md : modes_) s += 2.0 * md.weight;
  return s;
}

LatticeSpectrum LatticeSpectrum::first_modes(std::size_t n) const {
  LatticeSpectrum s = *this;
  if (n < s.modes_.size()) {
    for (std::size_t i = n; i < s.modes_.size(); ++i) s.omitted_bound_ += 2.0 * s.modes_[i].weight;
    s.modes_.resize(n);
  }
  return s;
}

// ---------------------------------------------------------------------------

ContinuumKernel::ContinuumKernel(Amplitude amp, int m) : amp_(std::move(amp)), m_(m) {
  check_dimension(m);
}

double ContinuumKernel::deriv(const Vec& z, const MultiIndex& alpha) const {
  check_order(alpha);
  if (amp_.kind() == Amplitude::Kind::gaussian) return gaussian_kernel_deriv(amp_.scale(), m_, z, alpha);
  return deriv_quadrature(z, alpha);
}

double ContinuumKernel::deriv_minus_origin(const Vec& z, const MultiIndex& alpha) const {
  check_order(alpha);
  if (alpha.order() % 2) return deriv(z, alpha);
  if (amp_.kind() == Amplitude::Kind::gaussian)
    return gaussian_kernel_deriv_minus_origin(amp_.scale(), m_, z, alpha);
  return quadrature(z, alpha, true);
}

double ContinuumKernel::deriv_quadrature(const Vec& z, const MultiIndex& alpha) const {
  return quadrature(z, alpha, false);
}

double ContinuumKernel::quadrature(const Vec& z, const MultiIndex& alpha, bool minus_origin) const {
  check_order(alpha);
  const int n = alpha.order();
  const double L = amp_.effective_support();
  const double norm = std::pow(kTwoPi, -m_);
  auto monomial = [&](const Vec& xi) {
    double p = 1.0;
    for (int i = 0; i < m_; ++i) p *= std::pow(xi[i], alpha[i]);
    return p;
  };
  // For even orders the difference from the origin only changes cos t into
  // cos t - 1 = -2 sin^2(t/2).
  auto cosine = [minus_origin](double t) {
    if (!minus_origin) return std::cos(t);
    const double h = std::sin(0.5 * t);
    return -2.0 * h * h;
  };
  if (m_ == 1) {
    using boost::math::quadrature::gauss_kronrod;
    auto f = [&](double x) {
      const double a = amp_(x);
      const double t = x * z[0];
      return std::pow(x, alpha[0]) * cos_deriv(n, cosine(t), std::sin(t)) * a * a;
    };
    double err = 0.0, l1 = 0.0;
    const double v = gauss_kronrod<double, 61>::integrate(f, -L, L, 25, 1e-11, &err, &l1);
    if (err > 1e-9 * std::max(l1, 1e-300)) {
      std::ostringstream os;
      os << "kernel quadrature did not converge (residual estimate " << err << ")";
      throw Error(ErrorCode::quadrature, os.str());
    }
    return norm * v;
  }
  // Tensor composite Gauss-Legendre on [-Lq, Lq]^m; panel count tracks the
  // oscillation frequency |z|. Beyond Lq the weight a^2 is below 1e-20.
  double Lq = L;
  try {
    Lq = std::min(L, amp_.truncation_radius(1e-10));
  } catch (const Error&) {
  }
  const auto& gx = boost::math::quadrature::gauss<double, 20>::abscissa();
  const auto& gw = boost::math::quadrature::gauss<double, 20>::weights();
  auto integrate = [&](int panels) {
    std::vector<double> px, pw;
    for (int p = 0; p < panels; ++p) {
      const double lo = -Lq + 2.0 * Lq * p / panels;
      const double h = Lq / panels, c = lo + h;
      for (std::size_t j = 0; j < gx.size(); ++j) {
        px.push_back(c + h * gx[j]);
        pw.push_back(gw[j] * h);
        if (gx[j] != 0.0) {
          px.push_back(c - h * gx[j]);
          pw.push_back(gw[j] * h);
        }
      }
    }
    const std::size_t N = px.size();
    double sum = 0.0, l1 = 0.0;
    Vec xi(m_);
    std::array<std::size_t, kMaxDim> idx{};
    for (;;) {
      double w = 1.0;
      for (int i = 0; i < m_; ++i) {
        xi[i] = px[idx[i]];
        w *= pw[idx[i]];
      }
      const double wt = amp_.spectral_weight(xi);
      if (wt != 0.0) {
        const double t = xi.dot(z);
        const double term = w * monomial(xi) * cos_deriv(n, cosine(t), std::sin(t)) * wt;
        sum += term;
        l1 += std::fabs(term);
      }
      int i = m_ - 1;
      while (i >= 0 && ++idx[i] == N) idx[i--] = 0;
      if (i < 0) break;
    }
    return std::pair{norm * sum, norm * l1};
  };
  const int base = std::max(4, static_cast<int>(std::ceil(Lq * (z.lpNorm<Eigen::Infinity>() + 1.0) / 8.0)));
  const double coarse = integrate(base).first;
  if (m_ == 3) return coarse;
  const auto [fine, l1] = integrate(2 * base);
  if (std::fabs(fine - coarse) > 1e-9 * l1 + 1e-15) {
    std::ostringstream os;
    os << "kernel quadrature did not converge (residual estimate " << std::fabs(fine - coarse) << ")";
    throw Error(ErrorCode::quadrature, os.str());
  }
  return fine;
}

std::string ContinuumKernel::describe() const {
  return "continuum " + amp_.describe() + " m=" + std::to_string(m_);
}

double LatticeKernel::deriv(const Vec& z, const MultiIndex& alpha) const {
  return kernel_deriv_lattice(spec_, z, alpha);
}

double LatticeKernel::deriv_minus_origin(const Vec& z, const MultiIndex& alpha) const {
  check_order(alpha);
  const int n = alpha.order();
  if (n % 2) return deriv(z, alpha);
  // cos(t) - 1 = -2 sin^2(t/2)
  const int m = spec_.dim();
  double sum = 0.0;
  for (const auto& md : spec_.modes()) {
    double mono = 1.0;
    double phase = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int e = 0; e < alpha[i]; ++e) mono *= md.k[i];
      phase += md.k[i] * z[i];
    }
    const double s = std::sin(0.5 * phase);
    sum += md.weight * mono * (-2.0 * s * s);
  }
  return (n % 4 == 0 ? 2.0 : -2.0) * sum;
}

std::string LatticeKernel::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "lattice " << spec_.amplitude().describe() << " m=" << spec_.dim() << " R=" << spec_.R();
  return os.str();
}

double kernel_deriv_continuum(const Amplitude& amp, int m, const Vec& z, const MultiIndex& alpha) {
  return ContinuumKernel(amp, m).deriv(z, alpha);
}

double kernel_deriv_lattice(const LatticeSpectrum& spec, const Vec& z, const MultiIndex& alpha) {
  check_order(alpha);
  const int m = spec.dim();
  if (z.size() != m || alpha.dim() != m)
    throw Error(ErrorCode::invalid_argument, "dimension mismatch in kernel_deriv_lattice");
  const int n = alpha.order();
  double sum = 0.0;
  for (const auto& md : spec.modes()) {
    double mono = 1.0;
    double phase = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int e = 0; e < alpha[i]; ++e) mono *= md.k[i];
      phase += md.k[i] * z[i];
    }
    sum += md.weight * mono * cos_deriv(n, std::cos(phase), std::sin(phase));
  }
  sum *= 2.0;
  if (n == 0) sum += spec.zero_weight();
  return sum;
}

double kernel_poisson(const Amplitude& amp, int m, double R, const Vec& z) {
  check_dimension(m);
  if (!(R > 0.0)) throw Error(ErrorCode::invalid_argument, "R must be positive");
  const auto decay = KernelDecay::make(amp, m);
  ContinuumKernel K(amp, m);
  // Reduce into [-R/2, R/2)^m so |Rk - z|_inf >= R(j - 1/2) on the shell |k|_inf = j.
  Vec zr(m);
  for (int i = 0; i < m; ++i) zr[i] = z[i] - R * std::floor(z[i] / R + 0.5);
  auto tail_from = [&](int j0) {
    double t = 0.0;
    for (int j = j0; j < j0 + 2000; ++j) {
      const double term = shell_count(m, j) * decay->sup_beyond(0, R * (j - 0.5));
      t += term;
      if (term < 1e-30 * t || term == 0.0) break;
    }
    return t;
  };
  int kmax = 1;
  while (tail_from(kmax + 1) >= 1e-14) {
    ++kmax;
    if (kmax > 200) throw Error(ErrorCode::quadrature, "image sum tail does not reach 1e-14");
  }
  double sum = 0.0;
  const MultiIndex zero(m);
  for_each_in_box(m, kmax, [&](const LatticeVec& k) {
    Vec y(m);
    for (int i = 0; i < m; ++i) y[i] = R * k[i] - zr[i];
    sum += K.deriv(y, zero);
  });
  return sum;
}

double kernel_gap_bound(const Amplitude& amp, int m, double R, double r0, int ell, double p) {
  check_dimension(m);
  if (p <= m) throw Error(ErrorCode::invalid_argument, "divergent tail sum");
  if (!(R > 2.0)) throw Error(ErrorCode::invalid_argument, "kernel_gap_bound requires R > 2");
  if (!(r0 > 0.0 && r0 < 1.0)) throw Error(ErrorCode::invalid_argument, "r0 must lie in (0,1)");
  if (ell < 0 || ell > kMaxKernelOrder) throw Error(ErrorCode::invalid_argument, "ell must lie in [0,4]");
  const auto decay = KernelDecay::make(amp, m);
  const double C = decay->schwartz_constant(ell, p);
  // For x in RB and k != 0, |x - Rk|_inf >= R(|k|_inf - r0/2).
  constexpr int J = 4000;
  double shells = 0.0;
  for (int j = 1; j <= J; ++j) shells += shell_count(m, j) * std::pow(j - 0.5 * r0, -p);
  // shell_count <= 2m 3^{m-1} j^{m-1} and j - r0/2 >= j/2 for j >= 1.
  shells += 2.0 * m * std::pow(3.0, m - 1) * std::pow(2.0, p) * std::pow(J, m - p) / (p - m);
  return C * shells * std::pow(R, -p);
}

double kernel_T(const KernelSource& kernel, const Vec& z) {
  double s = 0.0;
  for (const auto& a : multi_indices_up_to(kernel.dim(), kMaxKernelOrder)) s += std::fabs(kernel.deriv(z, a));
  return s;
}

double T_R(const LatticeSpectrum& spec, const Vec& z) { return kernel_T(LatticeKernel(spec), z); }

std::unique_ptr<KernelDecay> KernelDecay::make(const Amplitude& amp, int m) {
  check_dimension(m);
  switch (amp.kind()) {
    case Amplitude::Kind::gaussian:
      return std::make_unique<GaussianDecay>(amp.scale(), m);
    case Amplitude::Kind::bump: {
      // The certificate costs a few tensor quadratures; cache per (radius, m).
      static std::mutex mu;
      static std::vector<std::pair<std::pair<double, int>, std::shared_ptr<BumpDecay>>> cache;
      std::shared_ptr<BumpDecay> found;
      {
        std::lock_guard lock(mu);
        for (auto& [key, val] : cache)
          if (key.first == amp.scale() && key.second == m) found = val;
        if (!found) {
          found = std::make_shared<BumpDecay>(amp.scale(), m);
          cache.push_back({{amp.scale(), m}, found});
        }
      }
      return std::make_unique<BumpDecay>(*found);
    }
    case Amplitude::Kind::table:
      break;
  }
  throw Error(ErrorCode::uncertified_tail, "uncertified tail: no kernel decay certificate for " +
                                                amp.describe());
}

}  // namespace critfield
