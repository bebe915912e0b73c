#include "critfield/sampler.hpp"

#include <cmath>
#include <complex>
#include <iomanip>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "critfield/rng.hpp"

namespace critfield {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW's planner is not reentrant; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

/// cos and sin of 2 pi l theta_i for every |l| <= L and coordinate i, each
/// from a reduced argument; term phases are combined by angle addition.
class PhaseTable {
 public:
  PhaseTable(const Vec& theta, int m, int L) : m_(m), L_(L), w_(2 * L + 1) {
    cs_.resize(static_cast<std::size_t>(m) * w_ * 2);
    for (int i = 0; i < m; ++i)
      for (int l = -L; l <= L; ++l) {
        double t = l * theta[i];
        t = kTwoPi * (t - std::nearbyint(t));
        double* e = &cs_[(static_cast<std::size_t>(i) * w_ + (l + L)) * 2];
        e[0] = std::cos(t);
        e[1] = std::sin(t);
      }
  }
  void get(const LatticeVec& l, double& c, double& s) const {
    const double* e = entry(0, l[0]);
    c = e[0];
    s = e[1];
    for (int i = 1; i < m_; ++i) {
      const double* f = entry(i, l[i]);
      const double cn = c * f[0] - s * f[1];
      s = s * f[0] + c * f[1];
      c = cn;
    }
  }

 private:
  const double* entry(int i, int l) const { return &cs_[(static_cast<std::size_t>(i) * w_ + (l + L_)) * 2]; }
  int m_, L_, w_;
  std::vector<double> cs_;
};

inline std::uint64_t lattice_key(std::uint64_t seed, const LatticeVec& l) {
  return rng::mix({seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(l[0])),
                   static_cast<std::uint64_t>(static_cast<std::int64_t>(l[1])),
                   static_cast<std::uint64_t>(static_cast<std::int64_t>(l[2]))});
}

}  // namespace

Vec reduce_torus(const Vec& theta) {
  Vec r = theta;
  for (int i = 0; i < r.size(); ++i) {
    r[i] -= std::floor(r[i]);
    if (r[i] >= 1.0) r[i] = 0.0;
  }
  return r;
}

FieldSample FieldSample::draw(const LatticeSpectrum& spec, std::uint64_t seed) {
  FieldSample f;
  f.m_ = spec.dim();
  f.R_ = spec.R();
  f.seed_ = seed;
  const double norm = std::pow(spec.R(), -0.5 * spec.dim());
  double z0, unused;
  rng::normal_pair(lattice_key(seed, LatticeVec{0, 0, 0}), z0, unused);
  f.A0_ = z0;
  f.c0_ = norm * z0;
  f.terms_.reserve(spec.modes().size());
  for (const auto& md : spec.modes()) {
    FieldTerm t;
    t.ell = md.ell;
    rng::normal_pair(lattice_key(seed, md.ell), t.A, t.B);
    const double amp = norm * std::numbers::sqrt2 * md.amplitude;
    t.c = amp * t.A;
    t.s = amp * t.B;
    t.weight = md.weight;
    f.terms_.push_back(t);
  }
  f.tail_var_ = spec.omitted_weight_bound();
  f.update_max_index();
  return f;
}

FieldSample FieldSample::from_terms(int m, double R, double c0, std::vector<FieldTerm> terms) {
  check_dimension(m);
  FieldSample f;
  f.m_ = m;
  f.R_ = R;
  f.c0_ = c0;
  for (auto& t : terms) {
    for (int i = m; i < kMaxDim; ++i)
      if (t.ell[i] != 0) throw Error(ErrorCode::invalid_argument, "term index exceeds dimension");
    t.weight = 0.5 * (t.c * t.c + t.s * t.s);
  }
  f.terms_ = std::move(terms);
  f.update_max_index();
  return f;
}

void FieldSample::update_max_index() {
  max_index_ = 0;
  for (const auto& t : terms_)
    for (int i = 0; i < m_; ++i) max_index_ = std::max(max_index_, std::abs(t.ell[i]));
}

double FieldSample::grad_variance() const {
  double v = 0.0;
  for (const auto& t : terms_) {
    const double k = kTwoPi * t.ell[0];
    v += 2.0 * t.weight * k * k;
  }
  return v;
}

double FieldSample::hess_variance() const {
  double v = 0.0;
  for (const auto& t : terms_) {
    const double k2 = kTwoPi * t.ell[0] * kTwoPi * t.ell[0];
    v += 2.0 * t.weight * k2 * k2;
  }
  return v;
}

double FieldSample::value(const Vec& theta) const {
  const Vec th = reduce_torus(theta);
  const PhaseTable table(th, m_, max_index());
  double v = c0_;
  for (const auto& t : terms_) {
    double cs, sn;
    table.get(t.ell, cs, sn);
    v += t.c * cs + t.s * sn;
  }
  return v;
}

Jet FieldSample::eval_jet(const Vec& theta, int order) const {
  if (order < 0 || order > 2) throw Error(ErrorCode::unsupported, "eval_jet supports order 0, 1, 2");
  if (theta.size() != m_) throw Error(ErrorCode::invalid_argument, "theta has wrong dimension");
  const Vec th = reduce_torus(theta);
  Jet j;
  j.value = c0_;
  j.grad = Vec::Zero(m_);
  j.hess = Mat::Zero(m_, m_);
  const PhaseTable table(th, m_, max_index());
  for (const auto& t : terms_) {
    double cs, sn;
    table.get(t.ell, cs, sn);
    const double f0 = t.c * cs + t.s * sn;
    j.value += f0;
    if (order == 0) continue;
    // d/dtheta_i multiplies by 2 pi l_i and rotates (c, s) -> (s, -c).
    const double f1 = t.s * cs - t.c * sn;
    double k[kMaxDim];
    for (int i = 0; i < m_; ++i) k[i] = kTwoPi * t.ell[i];
    for (int i = 0; i < m_; ++i) j.grad[i] += k[i] * f1;
    if (order == 1) continue;
    for (int a = 0; a < m_; ++a)
      for (int b = a; b < m_; ++b) j.hess(a, b) -= k[a] * k[b] * f0;
  }
  for (int a = 0; a < m_ && order == 2; ++a)
    for (int b = 0; b < a; ++b) j.hess(a, b) = j.hess(b, a);
  return j;
}

double FieldSample::derivative(const Vec& theta, const MultiIndex& alpha) const {
  if (theta.size() != m_ || alpha.dim() != m_)
    throw Error(ErrorCode::invalid_argument, "dimension mismatch in derivative");
  const Vec th = reduce_torus(theta);
  const int n = alpha.order();
  double v = n == 0 ? c0_ : 0.0;
  const PhaseTable table(th, m_, max_index());
  for (const auto& t : terms_) {
    double mono = 1.0;
    for (int i = 0; i < m_; ++i)
      for (int e = 0; e < alpha[i]; ++e) mono *= kTwoPi * t.ell[i];
    if (mono == 0.0) continue;
    double cs, sn;
    table.get(t.ell, cs, sn);
    double d;
    switch (n & 3) {
      case 0: d = t.c * cs + t.s * sn; break;
      case 1: d = t.s * cs - t.c * sn; break;
      case 2: d = -t.c * cs - t.s * sn; break;
      default: d = t.c * sn - t.s * cs; break;
    }
    v += mono * d;
  }
  return v;
}

std::vector<double> FieldSample::grid_derivative(int n, const MultiIndex& alpha) const {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "grid size must be positive");
  if (alpha.dim() != m_) throw Error(ErrorCode::invalid_argument, "dimension mismatch in grid");
  std::size_t total = 1;
  for (int i = 0; i < m_; ++i) total *= static_cast<std::size_t>(n);
  std::vector<std::complex<double>> spec(total, {0.0, 0.0});
  auto flat = [&](const LatticeVec& l, int sign) {
    std::size_t idx = 0;
    for (int i = 0; i < m_; ++i) {
      int v = (sign * l[i]) % n;
      if (v < 0) v += n;
      idx = idx * n + static_cast<std::size_t>(v);
    }
    return idx;
  };
  // c cos(2 pi l.t) + s sin(2 pi l.t) = Re[(c - i s) e^{2 pi i l.t}]; the
  // derivative multiplies the +l coefficient by prod (2 pi i l_j)^{alpha_j}.
  // Accumulating both +l and -l keeps the transform exact under aliasing.
  const int order = alpha.order();
  const std::complex<double> iord = std::pow(std::complex<double>(0.0, 1.0), order);
  if (order == 0) spec[0] += c0_;
  for (const auto& t : terms_) {
    double mono = 1.0;
    for (int i = 0; i < m_; ++i)
      for (int e = 0; e < alpha[i]; ++e) mono *= kTwoPi * t.ell[i];
    if (mono == 0.0) continue;
    const std::complex<double> coef = 0.5 * mono * iord * std::complex<double>(t.c, -t.s);
    spec[flat(t.ell, 1)] += coef;
    spec[flat(t.ell, -1)] += std::conj(coef);
  }
  int dims[kMaxDim];
  for (int i = 0; i < m_; ++i) dims[i] = n;
  std::vector<std::complex<double>> out(total);
  auto* in_ptr = reinterpret_cast<fftw_complex*>(spec.data());
  auto* out_ptr = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft(m_, dims, in_ptr, out_ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  std::vector<double> values(total);
  for (std::size_t i = 0; i < total; ++i) values[i] = out[i].real();
  return values;
}

void FieldSample::write_coefficients(std::ostream& os) const {
  os << std::setprecision(17);
  for (int i = 0; i < m_; ++i) os << "l" << i + 1 << ",";
  os << "A,B,c,s\n";
  for (int i = 0; i < m_; ++i) os << "0,";
  os << A0_ << ",0," << c0_ << ",0\n";
  for (const auto& t : terms_) {
    for (int i = 0; i < m_; ++i) os << t.ell[i] << ",";
    os << t.A << "," << t.B << "," << t.c << "," << t.s << "\n";
  }
}

void FieldSample::write_grid(std::ostream& os, int n) const {
  const auto values = grid_values(n);
  os << std::setprecision(17);
  for (int i = 0; i < m_; ++i) os << "theta" << i + 1 << ",";
  os << "value\n";
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    std::size_t rest = idx;
    int coords[kMaxDim];
    for (int i = m_ - 1; i >= 0; --i) {
      coords[i] = static_cast<int>(rest % n);
      rest /= n;
    }
    for (int i = 0; i < m_; ++i) os << static_cast<double>(coords[i]) / n << ",";
    os << values[idx] << "\n";
  }
}

}  // namespace critfield
