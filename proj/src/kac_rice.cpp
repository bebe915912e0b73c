#include "critfield/kac_rice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Eigenvalues>

#include "critfield/rng.hpp"

namespace critfield {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::MatrixXd block_diag(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  r.topLeftCorner(a.rows(), a.cols()) = a;
  r.bottomRightCorner(b.rows(), b.cols()) = b;
  return r;
}

double min_eigenvalue(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// rho_hat = p_hat E_hat[|det H_x det H_y|], rho_tilde = p_tilde E_tilde[...].
struct PairSetup {
  Eigen::MatrixXd cond_hat;
  Eigen::MatrixXd cond_tilde;
  double p_hat = 0.0;
  double p_tilde = 0.0;
  double min_eig = 0.0;
  /// Maps the conditioned variables to (H0, H1); empty means identity.
  Eigen::MatrixXd hat_map;
};

void fill_tilde(PairSetup& s, const Eigen::MatrixXd& var_grad, const Eigen::MatrixXd& var_hess, int m) {
  s.cond_tilde = block_diag(var_hess, var_hess);
  s.p_tilde = std::pow(kTwoPi, -m) / var_grad.determinant();
}

PairSetup direct_setup(const KernelSource& kernel, const Vec& z) {
  const int m = kernel.dim();
  const int k = sym_size(m);
  const GaussianSpec g = pair_covariance(kernel, z);
  const Eigen::MatrixXd s11 = g.cov.topLeftCorner(2 * m, 2 * m);
  const Eigen::MatrixXd s21 = g.cov.block(2 * m, 0, 2 * k, 2 * m);
  const Eigen::MatrixXd s22 = g.cov.bottomRightCorner(2 * k, 2 * k);
  PairSetup s;
  s.min_eig = min_eigenvalue(s11);
  s.cond_hat = regression_covariance(s22, s21, s11);
  s.p_hat = std::pow(kTwoPi, -m) / std::sqrt(s11.determinant());
  fill_tilde(s, s11.topLeftCorner(m, m), s22.topLeftCorner(k, k), m);
  return s;
}

PairSetup gauge_setup(const KernelSource& kernel, double r, const Vec& nu) {
  const int m = kernel.dim();
  const int k = sym_size(m);
  const Vec z = r * nu;
  // Variables (grad0, Xi, H0, Psi) with Xi = (grad1 - grad0) / r and
  // Psi = (H1 - H0) / r. With D_a = (d^a Phi(z) - d^a Phi(0)) / r,
  //   cov(d^a Phi(0), D_b) = (-1)^{|a|} (d^{a+b} K(z) - d^{a+b} K(0)) / r
  //   cov(D_a, D_b)        = (-1)^{|a|+1} 2 (d^{a+b} K(z) - d^{a+b} K(0)) / r^2   (|a+b| even)
  //                        = 0                                                  (|a+b| odd)
  // so every entry comes from a cancellation-free kernel difference.
  std::vector<JetLabel> labels = gradient_labels(m, 0);
  for (auto& l : gradient_labels(m, 1)) labels.push_back(l);
  for (auto& l : hessian_labels(m, 0)) labels.push_back(l);
  for (auto& l : hessian_labels(m, 1)) labels.push_back(l);
  const int N = static_cast<int>(labels.size());
  const Vec origin = Vec::Zero(m);
  Eigen::MatrixXd c(N, N);
  for (int p = 0; p < N; ++p)
    for (int q = p; q < N; ++q) {
      const JetLabel& a = labels[p];
      const JetLabel& b = labels[q];
      const MultiIndex ab = a.alpha + b.alpha;
      const double sign = (a.alpha.order() % 2) ? -1.0 : 1.0;
      double v;
      if (a.point == 0 && b.point == 0) {
        v = sign * kernel.deriv(origin, ab);
      } else if (a.point == 1 && b.point == 1) {
        v = (ab.order() % 2) ? 0.0 : -sign * 2.0 * kernel.deriv_minus_origin(z, ab) / (r * r);
      } else {
        // One undifferenced point; orient so `a` is the one at the origin.
        const JetLabel& o = a.point == 0 ? a : b;
        const double so = (o.alpha.order() % 2) ? -1.0 : 1.0;
        v = so * kernel.deriv_minus_origin(z, ab) / r;
      }
      c(p, q) = c(q, p) = v;
    }
  const Eigen::MatrixXd s11 = c.topLeftCorner(2 * m, 2 * m);
  const Eigen::MatrixXd s21 = c.block(2 * m, 0, 2 * k, 2 * m);
  const Eigen::MatrixXd s22 = c.bottomRightCorner(2 * k, 2 * k);
  PairSetup s;
  s.min_eig = min_eigenvalue(s11);
  s.cond_hat = regression_covariance(s22, s21, s11);
  // (H0, Psi) -> (H0, H1 = H0 + r Psi)
  s.hat_map = Eigen::MatrixXd::Identity(2 * k, 2 * k);
  s.hat_map.block(k, 0, k, k) = Eigen::MatrixXd::Identity(k, k);
  s.hat_map.block(k, k, k, k) *= r;
  // p_{(grad0, grad1)}(0) = r^{-m} p_{(grad0, Xi)}(0)
  s.p_hat = std::pow(r, -m) * std::pow(kTwoPi, -m) / std::sqrt(s11.determinant());
  fill_tilde(s, s11.topLeftCorner(m, m), s22.topLeftCorner(k, k), m);
  return s;
}

struct PairEstimates {
  Estimate rho_hat, rho_tilde, delta;
};

PairEstimates run_pair(const PairSetup& s, int m, long n, std::uint64_t seed, const std::string& tag) {
  Eigen::MatrixXd hat = psd_factor(s.cond_hat);
  if (s.hat_map.size()) hat = s.hat_map * hat;
  const DetMonteCarlo mc = abs_det_monte_carlo({hat, psd_factor(s.cond_tilde)}, m, 2, n, seed);
  PairEstimates e;
  Eigen::VectorXd a(2);
  a << s.p_hat, 0.0;
  e.rho_hat = mc.combination(a, tag);
  a << 0.0, s.p_tilde;
  e.rho_tilde = mc.combination(a, tag);
  a << s.p_hat, -s.p_tilde;
  e.delta = mc.combination(a, tag + ", common random numbers");
  return e;
}

Vec canonical(const Vec& z) { return lex_positive(z) ? Vec(z) : Vec(-z); }

}  // namespace

double correlation_length(const KernelSource& kernel) {
  const int m = kernel.dim();
  const Vec zero = Vec::Zero(m);
  MultiIndex a4(m);
  a4.set(0, 4);
  const double d = -kernel.deriv(zero, MultiIndex::pair(m, 0, 0));
  const double h = kernel.deriv(zero, a4);
  if (!(d > 0.0 && h > 0.0)) throw Error(ErrorCode::degenerate, "kernel has no gradient or Hessian variance");
  return std::sqrt(d / h);
}

Estimate one_point_density(const Eigen::MatrixXd& var_grad, const Eigen::MatrixXd& cov_hessian, int m,
                           long n_mc, std::uint64_t seed) {
  check_dimension(m);
  if (var_grad.rows() != m || var_grad.cols() != m)
    throw Error(ErrorCode::invalid_argument, "gradient covariance must be m x m");
  const double lo = min_eigenvalue(0.5 * (var_grad + var_grad.transpose()));
  const double scale = var_grad.diagonal().cwiseAbs().maxCoeff();
  if (!(lo > 1e-12 * scale) || !(scale > 0.0)) {
    std::ostringstream os;
    os << "degenerate gradient covariance (min eigenvalue " << lo << ")";
    throw Error(ErrorCode::degenerate, os.str());
  }
  Estimate e = expected_abs_det(cov_hessian, m, n_mc, seed);
  const double p = std::pow(kTwoPi, -0.5 * m) / std::sqrt(var_grad.determinant());
  e.value *= p;
  e.std_error *= p;
  return e;
}

Estimate one_point_density(const KernelSource& kernel, long n_mc, std::uint64_t seed) {
  const int m = kernel.dim();
  std::vector<JetLabel> labels = gradient_labels(m, 0);
  for (auto& l : hessian_labels(m, 0)) labels.push_back(l);
  const GaussianSpec g = jet_covariance(kernel, Vec::Zero(m), labels);
  const int k = sym_size(m);
  return one_point_density(g.cov.topLeftCorner(m, m), g.cov.bottomRightCorner(k, k), m, n_mc, seed);
}

GaussianSpec pair_covariance(const KernelSource& kernel, const Vec& z) {
  const int m = kernel.dim();
  std::vector<JetLabel> labels = gradient_labels(m, 0);
  for (auto& l : gradient_labels(m, 1)) labels.push_back(l);
  for (auto& l : hessian_labels(m, 0)) labels.push_back(l);
  for (auto& l : hessian_labels(m, 1)) labels.push_back(l);
  return jet_covariance(kernel, z, labels);
}

GaussianSpec pair_covariance(const KernelSource& kernel, const Vec& x, const Vec& y) {
  return pair_covariance(kernel, Vec(y - x));
}

TwoPointReport two_point_density(const KernelSource& kernel, const Vec& z, long n_mc, std::uint64_t seed) {
  if (z.size() != kernel.dim()) throw Error(ErrorCode::invalid_argument, "separation has wrong dimension");
  if (z.isZero(0.0)) throw Error(ErrorCode::invalid_argument, "two_point_density needs z != 0");
  const PairSetup s = direct_setup(kernel, canonical(z));
  const PairEstimates e = run_pair(s, kernel.dim(), n_mc, seed, "monte carlo");
  return TwoPointReport{e.rho_hat, e.rho_tilde, e.delta, s.min_eig};
}

BlowUpReport blow_up_density(const KernelSource& kernel, double r, const Vec& nu, long n_mc, std::uint64_t seed) {
  const int m = kernel.dim();
  if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "blow-up radius must be positive");
  if (nu.size() != m || std::fabs(nu.norm() - 1.0) > 1e-12)
    throw Error(ErrorCode::invalid_argument, "direction must be a unit vector");
  const PairSetup s = gauge_setup(kernel, r, canonical(nu));
  const PairEstimates e = run_pair(s, m, n_mc, seed, "monte carlo, gauge-changed");
  BlowUpReport b;
  b.r = r;
  b.rho_hat = e.rho_hat;
  b.rho_tilde = e.rho_tilde;
  b.delta = e.delta;
  b.min_eig = s.min_eig;
  const double f = std::pow(r, m - 2);
  b.w = e.rho_hat;
  b.w.value *= f;
  b.w.std_error *= f;
  return b;
}

ConstantReport Z_m_const(const KernelSource& kernel, long n_mc_pair, int quad_nodes, std::uint64_t seed) {
  const int m = kernel.dim();
  if (quad_nodes < 8) throw Error(ErrorCode::invalid_argument, "quad_nodes must be at least 8");
  ConstantReport rep;
  rep.corr_len = correlation_length(kernel);
  rep.rho_one = one_point_density(kernel, n_mc_pair, rng::mix({seed, 0x6f6e65}));
  const double rho_t = rep.rho_one.value * rep.rho_one.value;
  Vec nu = Vec::Zero(m);
  nu[0] = 1.0;
  auto sqrtT = [&](double r) { return std::sqrt(kernel_T(kernel, Vec(r * nu))); };

  double r_max = rep.corr_len;
  while (sqrtT(r_max) >= 1e-6 * rho_t) {
    r_max *= 1.1;
    if (r_max > 1e4 * rep.corr_len) throw Error(ErrorCode::quadrature, "kernel does not decay to the cutoff");
  }
  rep.r_max = r_max;

  const auto& gx = boost::math::quadrature::gauss<double, 8>::abscissa();
  const auto& gw = boost::math::quadrature::gauss<double, 8>::weights();
  const int panels = (quad_nodes + 7) / 8;
  const double width = r_max / panels;
  const double S = sphere_area(m);
  double value = 0.0, var = 0.0;
  int node = 0;
  for (int p = 0; p < panels; ++p) {
    const double c = (p + 0.5) * width, h = 0.5 * width;
    for (std::size_t j = 0; j < gx.size(); ++j)
      for (int sgn : {-1, 1}) {
        RadialNode nd;
        nd.r = c + sgn * h * gx[j];
        nd.weight = gw[j] * h;
        nd.gauge = nd.r < 0.05 * rep.corr_len;
        const std::uint64_t s = rng::mix({seed, static_cast<std::uint64_t>(node++)});
        if (nd.gauge) {
          const BlowUpReport b = blow_up_density(kernel, nd.r, nu, n_mc_pair, s);
          nd.rho_hat = b.rho_hat;
          nd.delta = b.delta;
        } else {
          const TwoPointReport t = two_point_density(kernel, Vec(nd.r * nu), n_mc_pair, s);
          nd.rho_hat = t.rho_hat;
          nd.delta = t.delta;
        }
        const double f = nd.weight * S * std::pow(nd.r, m - 1);
        value += f * nd.delta.value;
        var += f * nd.delta.std_error * f * nd.delta.std_error;
        rep.nodes.push_back(nd);
      }
  }
  std::sort(rep.nodes.begin(), rep.nodes.end(), [](const RadialNode& a, const RadialNode& b) { return a.r < b.r; });

  // Far-field constant from nodes where delta is resolved above noise.
  double C = 0.0;
  for (const auto& nd : rep.nodes)
    if (std::fabs(nd.delta.value) > 3.0 * nd.delta.std_error)
      C = std::max(C, std::fabs(nd.delta.value) / sqrtT(nd.r));
  if (C == 0.0) C = rho_t / sqrtT(0.0);
  rep.decay_constant = C;
  using boost::math::quadrature::gauss_kronrod;
  const double tail_integral = gauss_kronrod<double, 31>::integrate(
      [&](double r) { return std::pow(r, m - 1) * sqrtT(r); }, r_max, 4.0 * r_max, 10, 1e-8);
  rep.tail_bound = S * C * tail_integral;

  rep.value.value = value;
  rep.value.std_error = std::sqrt(var) + rep.tail_bound;
  rep.value.samples = n_mc_pair * static_cast<long>(rep.nodes.size());
  rep.value.method = "radial gauss-legendre, monte carlo per node";
  return rep;
}

ConstantReport Z_m_const(const Amplitude& amp, int m, long n_mc_pair, int quad_nodes, std::uint64_t seed) {
  return Z_m_const(ContinuumKernel(amp, m), n_mc_pair, quad_nodes, seed);
}

VarianceConstant V_m_const(const Amplitude& amp, int m, long n_mc_one, long n_mc_pair, int quad_nodes,
                           std::uint64_t seed) {
  const ContinuumKernel K(amp, m);
  VarianceConstant v;
  v.C = one_point_density(K, n_mc_one, rng::mix({seed, 1}));
  v.detail = Z_m_const(K, n_mc_pair, quad_nodes, rng::mix({seed, 2}));
  v.Z = v.detail.value;
  v.V.value = v.C.value + v.Z.value;
  v.V.std_error = std::hypot(v.C.std_error, v.Z.std_error);
  v.V.samples = v.C.samples + v.Z.samples;
  v.V.method = "C_m + Z_m";
  return v;
}

HolderCheck holder_continuity_check(const Eigen::MatrixXd& A0, const Eigen::MatrixXd& A, int m, long n_mc,
                                    std::uint64_t seed) {
  check_dimension(m);
  const int k = sym_size(m);
  if (A0.rows() != k || A.rows() != k || A0.cols() != k || A.cols() != k)
    throw Error(ErrorCode::invalid_argument, "covariances must be m(m+1)/2 square");
  for (const auto* a : {&A0, &A})
    if (!(min_eigenvalue(0.5 * (*a + a->transpose())) > 0.0))
      throw Error(ErrorCode::degenerate, "holder_continuity_check needs positive definite inputs");
  const DetMonteCarlo mc = abs_det_monte_carlo({psd_factor(A0), psd_factor(A)}, m, 1, n_mc, seed);
  Eigen::VectorXd a(2);
  a << 1.0, -1.0;
  HolderCheck h;
  h.lhs = mc.combination(a, "monte carlo, common random numbers");
  h.lhs.value = std::fabs(h.lhs.value);
  h.rhs = std::sqrt((A - A0).norm());
  return h;
}

}  // namespace critfield
