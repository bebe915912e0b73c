#include "critfield/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "critfield/parallel.hpp"
#include "critfield/rng.hpp"

namespace critfield {

namespace {

constexpr long kBatch = 2048;

inline double det_packed(const double* e, int m) {
  switch (m) {
    case 1: return e[0];
    case 2: return e[0] * e[2] - e[1] * e[1];
    default: {
      // (00 01 02 / 11 12 / 22)
      const double a = e[0], b = e[1], c = e[2], d = e[3], f = e[4], g = e[5];
      return a * (d * g - f * f) - b * (b * g - f * c) + c * (b * f - d * c);
    }
  }
}

double matrix_scale(const Eigen::MatrixXd& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i) s = std::max(s, std::fabs(a(i, i)));
  return s;
}

}  // namespace

GaussianSpec GaussianSpec::select(const std::vector<int>& idx) const {
  GaussianSpec g;
  const int n = static_cast<int>(idx.size());
  g.cov.resize(n, n);
  for (int i = 0; i < n; ++i) {
    g.labels.push_back(labels[idx[i]]);
    for (int j = 0; j < n; ++j) g.cov(i, j) = cov(idx[i], idx[j]);
  }
  return g;
}

std::vector<int> GaussianSpec::find(const std::string& prefix) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (labels[i].rfind(prefix, 0) == 0) out.push_back(i);
  return out;
}

Eigen::MatrixXd psd_repair(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols()) throw Error(ErrorCode::invalid_argument, "covariance must be square");
  if (cov.size() == 0) return cov;
  Eigen::MatrixXd s = 0.5 * (cov + cov.transpose());
  const double scale = matrix_scale(s);
  if (scale == 0.0) return s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  const double lo = es.eigenvalues().minCoeff();
  if (lo >= 0.0) return s;
  if (lo < -1e-10 * scale) {
    std::ostringstream os;
    os << "covariance is not positive semidefinite (min eigenvalue " << lo << ", scale " << scale << ")";
    throw Error(ErrorCode::not_psd, os.str());
  }
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd r = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (r + r.transpose());
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
  const Eigen::MatrixXd s = psd_repair(cov);
  if (s.size() == 0) return s;
  if (matrix_scale(s) == 0.0) return Eigen::MatrixXd::Zero(s.rows(), s.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd regression_covariance(const Eigen::MatrixXd& sigma22, const Eigen::MatrixXd& sigma21,
                                      const Eigen::MatrixXd& sigma11) {
  if (sigma21.rows() != sigma22.rows() || sigma21.cols() != sigma11.rows() ||
      sigma11.rows() != sigma11.cols() || sigma22.rows() != sigma22.cols())
    throw Error(ErrorCode::invalid_argument, "regression_covariance: inconsistent block sizes");
  const Eigen::MatrixXd s11 = 0.5 * (sigma11 + sigma11.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s11);
  const double lo = es.eigenvalues().minCoeff();
  const double scale = std::max(matrix_scale(s11), 1e-300);
  if (!(lo > 1e-12 * scale)) {
    std::ostringstream os;
    os << "degenerate conditioning (min eigenvalue " << lo << ", scale " << scale << ")";
    throw Error(ErrorCode::degenerate, os.str());
  }
  const Eigen::MatrixXd solved = es.eigenvectors() *
                                 es.eigenvalues().cwiseInverse().asDiagonal() *
                                 (es.eigenvectors().transpose() * sigma21.transpose());
  Eigen::MatrixXd r = sigma22 - sigma21 * solved;
  r = 0.5 * (r + r.transpose());
  return psd_repair(r);
}

Mat unpack_symmetric(const double* e, int m) {
  Mat h(m, m);
  int k = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      h(i, j) = e[k];
      h(j, i) = e[k];
      ++k;
    }
  return h;
}

Estimate DetMonteCarlo::estimate(int j, const std::string& method) const {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(mean.size());
  a[j] = 1.0;
  return combination(a, method);
}

Estimate DetMonteCarlo::combination(const Eigen::VectorXd& a, const std::string& method) const {
  Estimate e;
  e.value = a.dot(mean);
  e.std_error = std::sqrt(std::max(0.0, a.dot(mean_cov * a)));
  e.samples = samples;
  e.method = method;
  return e;
}

DetMonteCarlo abs_det_monte_carlo(const std::vector<Eigen::MatrixXd>& factors, int m, int blocks,
                                  long n, std::uint64_t seed) {
  check_dimension(m);
  if (n < 2) throw Error(ErrorCode::invalid_argument, "Monte Carlo needs at least 2 samples");
  if (factors.empty()) throw Error(ErrorCode::invalid_argument, "no determinant functionals");
  const int dim = sym_size(m) * blocks;
  for (const auto& f : factors)
    if (f.rows() != dim || f.cols() != dim)
      throw Error(ErrorCode::invalid_argument, "factor size does not match m and block count");
  const int J = static_cast<int>(factors.size());
  const long batches = (n + kBatch - 1) / kBatch;
  struct Partial {
    Eigen::VectorXd s;
    Eigen::MatrixXd ss;
  };
  std::vector<Partial> parts(static_cast<std::size_t>(batches));
  parallel_for(static_cast<std::size_t>(batches), [&](std::size_t b) {
    const long count = std::min<long>(kBatch, n - static_cast<long>(b) * kBatch);
    rng::NormalStream stream(seed, b);
    Eigen::VectorXd z(dim), x(dim), v(J);
    Partial p{Eigen::VectorXd::Zero(J), Eigen::MatrixXd::Zero(J, J)};
    for (long i = 0; i < count; ++i) {
      for (int d = 0; d < dim; ++d) z[d] = stream.next();
      for (int j = 0; j < J; ++j) {
        x.noalias() = factors[j] * z;
        double prod = 1.0;
        for (int blk = 0; blk < blocks; ++blk) prod *= std::fabs(det_packed(x.data() + blk * sym_size(m), m));
        v[j] = prod;
      }
      p.s += v;
      p.ss.noalias() += v * v.transpose();
    }
    parts[b] = std::move(p);
  });
  Eigen::VectorXd s = Eigen::VectorXd::Zero(J);
  Eigen::MatrixXd ss = Eigen::MatrixXd::Zero(J, J);
  for (const auto& p : parts) {
    s += p.s;
    ss += p.ss;
  }
  DetMonteCarlo r;
  r.samples = n;
  const double nd = static_cast<double>(n);
  r.mean = s / nd;
  r.mean_cov = (ss - nd * r.mean * r.mean.transpose()) / (nd * (nd - 1.0));
  return r;
}

Estimate expected_abs_det(const Eigen::MatrixXd& cov_hessian, int m, long n_mc, std::uint64_t seed) {
  check_dimension(m);
  if (cov_hessian.rows() != sym_size(m) || cov_hessian.cols() != sym_size(m))
    throw Error(ErrorCode::invalid_argument, "Hessian covariance must be m(m+1)/2 square");
  const Eigen::MatrixXd L = psd_factor(cov_hessian);
  if (L.isZero(0.0)) return Estimate{0.0, 0.0, n_mc, "exact zero"};
  return abs_det_monte_carlo({L}, m, 1, n_mc, seed).estimate(0, "monte carlo");
}

// ---------------------------------------------------------------------------

bool lex_positive(const Vec& z) {
  for (int i = 0; i < z.size(); ++i) {
    if (z[i] > 0.0) return true;
    if (z[i] < 0.0) return false;
  }
  return false;
}

std::string JetLabel::name() const {
  std::string s = point == 0 ? "x:" : "y:";
  const int n = alpha.order();
  if (n == 0) return s + "F";
  s += n == 1 ? "d" : (n == 2 ? "H" : "D");
  for (int i = 0; i < alpha.dim(); ++i)
    for (int e = 0; e < alpha[i]; ++e) s += std::to_string(i + 1);
  return s;
}

std::vector<JetLabel> gradient_labels(int m, int point) {
  std::vector<JetLabel> out;
  for (int i = 0; i < m; ++i) out.push_back({point, MultiIndex::unit(m, i)});
  return out;
}

std::vector<JetLabel> hessian_labels(int m, int point) {
  std::vector<JetLabel> out;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) out.push_back({point, MultiIndex::pair(m, i, j)});
  return out;
}

std::vector<JetLabel> jet_labels(int m, int k, int point) {
  if (k < 0 || k > 2) throw Error(ErrorCode::unsupported, "jet order must be 0, 1 or 2");
  std::vector<JetLabel> out{{point, MultiIndex(m)}};
  if (k >= 1)
    for (auto& l : gradient_labels(m, point)) out.push_back(l);
  if (k >= 2)
    for (auto& l : hessian_labels(m, point)) out.push_back(l);
  return out;
}

GaussianSpec jet_covariance(const KernelSource& kernel, const Vec& z, const std::vector<JetLabel>& labels) {
  const int m = kernel.dim();
  if (z.size() != m) throw Error(ErrorCode::invalid_argument, "separation has wrong dimension");
  const Vec zero = Vec::Zero(m);
  const bool positive = lex_positive(z);
  const Vec zc = positive ? Vec(z) : Vec(-z);
  auto value_at = [&](int dp, const MultiIndex& a) {
    // K evaluated at (x_q - x_p) = dp * z, dp in {-1, 0, 1}
    const int n = a.order();
    if (dp == 0 || zc.isZero(0.0)) {
      if (n % 2) return 0.0;
      return kernel.deriv(zero, a);
    }
    const double v = kernel.deriv(zc, a);
    const bool flip = (dp > 0) != positive;  // evaluation point is -zc
    return (flip && (n % 2)) ? -v : v;
  };
  const int N = static_cast<int>(labels.size());
  GaussianSpec g;
  g.cov.resize(N, N);
  for (const auto& l : labels) {
    if (l.alpha.dim() != m || l.point < 0 || l.point > 1)
      throw Error(ErrorCode::invalid_argument, "bad jet label");
    if (l.alpha.order() > 2) throw Error(ErrorCode::unsupported, "jets are limited to order 2");
    g.labels.push_back(l.name());
  }
  for (int p = 0; p < N; ++p)
    for (int q = p; q < N; ++q) {
      const auto& a = labels[p];
      const auto& b = labels[q];
      const double sign = (a.alpha.order() % 2) ? -1.0 : 1.0;
      const double v = sign * value_at(b.point - a.point, a.alpha + b.alpha);
      g.cov(p, q) = v;
      g.cov(q, p) = v;
    }
  return g;
}

}  // namespace critfield
