#include "critfield/critical_finder.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "critfield/amplitude.hpp"

namespace critfield {

namespace {

double torus_distance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    double d = std::fabs(a[i] - b[i]);
    d -= std::floor(d);
    d = std::min(d, 1.0 - d);
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<double> split_args(const std::string& args) {
  std::vector<double> out;
  std::stringstream ss(args);
  std::string p;
  while (std::getline(ss, p, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(p, &used);
      while (used < p.size() && std::isspace(static_cast<unsigned char>(p[used]))) ++used;
      if (used != p.size()) throw std::invalid_argument("trailing");
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::invalid_argument, "bad test function argument '" + p + "'");
    }
  }
  return out;
}

/// \int_0^1 u^{m-1} (1 - u^2)^k du = B(m/2, k+1) / 2.
double bump_radial(int m, int k) {
  return 0.5 * std::tgamma(0.5 * m) * std::tgamma(k + 1.0) / std::tgamma(0.5 * m + k + 1.0);
}

struct NewtonResult {
  Vec theta;
  double residual = 0.0;
  bool converged = false;
};

/// Newton on grad F = 0. Iterates that stray more than `leash` (max-norm,
/// torus) from the seed are abandoned: points out there have seeds of their own.
NewtonResult newton(const FieldSample& f, const Vec& x0, double tol, int max_iter, double step_cap,
                    double leash, double hscale) {
  const int m = f.dim();
  NewtonResult res;
  Vec x = x0;
  for (int it = 0; it <= max_iter; ++it) {
    const Jet j = f.eval_jet(x, 2);
    const double r = j.grad.norm();
    if (!std::isfinite(r)) break;
    if (r <= tol) {
      res.theta = reduce_torus(x);
      res.residual = r;
      res.converged = true;
      return res;
    }
    if (it == max_iter) break;
    Eigen::SelfAdjointEigenSolver<Mat> es(j.hess);
    Vec lam = es.eigenvalues();
    const double floor = 1e-8 * hscale;
    for (int i = 0; i < m; ++i)
      if (std::fabs(lam[i]) < floor) lam[i] = lam[i] < 0 ? -floor : floor;
    const Mat& V = es.eigenvectors();
    Vec step = V * (V.transpose() * j.grad).cwiseQuotient(lam);
    const double len = step.lpNorm<Eigen::Infinity>();
    if (len > step_cap) step *= step_cap / len;
    x = reduce_torus(x - step);
    for (int i = 0; i < m; ++i) {
      double off = x[i] - x0[i];
      off -= std::nearbyint(off);
      if (std::fabs(off) > leash) return res;
    }
  }
  return res;
}

}  // namespace

int CountingMeasure::euler_characteristic() const {
  int chi = 0;
  for (const auto& p : points_) chi += (p.morse_index % 2) ? -1 : 1;
  return chi;
}

int CountingMeasure::count_index(int index) const {
  int c = 0;
  for (const auto& p : points_) c += p.morse_index == index;
  return c;
}

void CountingMeasure::write_csv(std::ostream& os) const {
  os << std::setprecision(17);
  for (int i = 0; i < m_; ++i) os << "theta" << i + 1 << ",";
  os << "grad_residual,hess_det,morse_index,degenerate\n";
  for (const auto& p : points_) {
    for (int i = 0; i < m_; ++i) os << p.theta[i] << ",";
    os << p.grad_residual << "," << p.hess_det << "," << p.morse_index << ","
       << (p.degenerate ? 1 : 0) << "\n";
  }
}

// ---------------------------------------------------------------------------

TestFunction TestFunction::bump(const Vec& center, double r0) {
  check_dimension(static_cast<int>(center.size()));
  if (!(r0 > 0.0 && r0 < 0.5))
    throw Error(ErrorCode::invalid_argument, "bump radius r0 must lie in (0, 1/2)");
  TestFunction f;
  f.kind_ = Kind::bump;
  f.m_ = static_cast<int>(center.size());
  f.a_ = reduce_torus(center);
  f.r0_ = r0;
  return f;
}

TestFunction TestFunction::indicator(const Vec& lo, const Vec& hi) {
  check_dimension(static_cast<int>(lo.size()));
  if (lo.size() != hi.size()) throw Error(ErrorCode::invalid_argument, "box corners differ in dimension");
  for (int i = 0; i < lo.size(); ++i)
    if (!(lo[i] >= 0.0 && lo[i] <= hi[i] && hi[i] <= 1.0))
      throw Error(ErrorCode::invalid_argument, "box must satisfy 0 <= lo <= hi <= 1");
  TestFunction f;
  f.kind_ = Kind::indicator;
  f.m_ = static_cast<int>(lo.size());
  f.a_ = lo;
  f.b_ = hi;
  return f;
}

TestFunction TestFunction::full(int m) {
  check_dimension(m);
  TestFunction f;
  f.kind_ = Kind::full;
  f.m_ = m;
  return f;
}

TestFunction TestFunction::zero(int m) {
  check_dimension(m);
  TestFunction f;
  f.kind_ = Kind::zero;
  f.m_ = m;
  return f;
}

TestFunction TestFunction::parse(const std::string& descriptor, int m) {
  std::string d;
  for (char ch : descriptor)
    if (!std::isspace(static_cast<unsigned char>(ch))) d += ch;
  if (d == "zero") return zero(m);
  if (d == "full" || d == "indicator(full)") return full(m);
  const auto open = d.find('(');
  if (open == std::string::npos || d.back() != ')')
    throw Error(ErrorCode::invalid_argument, "cannot parse test function '" + descriptor + "'");
  const std::string name = d.substr(0, open);
  const auto args = split_args(d.substr(open + 1, d.size() - open - 2));
  if (name == "bump") {
    Vec c = Vec::Zero(m);
    if (args.size() == 1 + static_cast<std::size_t>(m)) {
      for (int i = 0; i < m; ++i) c[i] = args[1 + i];
    } else if (args.size() != 1) {
      throw Error(ErrorCode::invalid_argument, "bump takes r0 and optionally m center coordinates");
    }
    return bump(c, args[0]);
  }
  if (name == "box" && args.size() == 2 * static_cast<std::size_t>(m)) {
    Vec lo(m), hi(m);
    for (int i = 0; i < m; ++i) {
      lo[i] = args[2 * i];
      hi[i] = args[2 * i + 1];
    }
    return indicator(lo, hi);
  }
  throw Error(ErrorCode::invalid_argument, "unknown test function '" + descriptor + "'");
}

std::string TestFunction::describe() const {
  std::ostringstream os;
  os << std::setprecision(17);
  switch (kind_) {
    case Kind::zero: return "zero";
    case Kind::full: return "indicator(full)";
    case Kind::bump:
      os << "bump(" << r0_;
      for (int i = 0; i < m_; ++i) os << "," << a_[i];
      os << ")";
      return os.str();
    case Kind::indicator:
      os << "box(";
      for (int i = 0; i < m_; ++i) os << (i ? "," : "") << a_[i] << "," << b_[i];
      os << ")";
      return os.str();
  }
  return "";
}

double TestFunction::operator()(const Vec& theta) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::full: return 1.0;
    case Kind::bump: {
      const double d = torus_distance(theta, a_);
      if (d >= r0_) return 0.0;
      const double u = 1.0 - (d / r0_) * (d / r0_);
      return u * u * u;
    }
    case Kind::indicator: {
      const Vec t = reduce_torus(theta);
      for (int i = 0; i < m_; ++i)
        if (t[i] < a_[i] || t[i] >= b_[i]) return 0.0;
      return 1.0;
    }
  }
  return 0.0;
}

double TestFunction::integral() const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::full: return 1.0;
    case Kind::bump: return sphere_area(m_) * std::pow(r0_, m_) * bump_radial(m_, 3);
    case Kind::indicator: return (b_ - a_).prod();
  }
  return 0.0;
}

double TestFunction::integral_sq() const {
  if (kind_ == Kind::bump) return sphere_area(m_) * std::pow(r0_, m_) * bump_radial(m_, 6);
  return integral();
}

// ---------------------------------------------------------------------------

int auto_grid_size(const FieldSample& sample, int requested) {
  int n = std::max(requested, 2 * sample.max_index() + 1);
  const double gv = sample.grad_variance(), hv = sample.hess_variance();
  if (gv > 0.0 && hv > 0.0) {
    const double corr = std::sqrt(gv / hv);
    n = std::max(n, static_cast<int>(std::ceil(4.0 / corr)));
  }
  return std::max(n, 4);
}

CountingMeasure find_critical_points(const FieldSample& sample, const FinderOptions& opt) {
  const int m = sample.dim();
  if (!(opt.dedup_tol > 0.0) || !(opt.newton_tol > 0.0) || opt.max_newton_iter < 1)
    throw Error(ErrorCode::invalid_argument, "finder tolerances must be positive");
  FinderDiagnostics diag;
  const int n = auto_grid_size(sample, opt.grid_n);
  diag.grid_n = n;
  diag.aliased = sample.grid_aliases(n);
  if (sample.terms().empty()) return CountingMeasure(m, sample.R(), {}, diag);

  const double gscale = std::sqrt(sample.grad_variance());
  const double hscale = std::sqrt(sample.hess_variance());
  const double tol = opt.newton_tol * gscale;
  const double h = 1.0 / n;

  std::size_t total = 1;
  for (int i = 0; i < m; ++i) total *= static_cast<std::size_t>(n);
  std::vector<std::vector<double>> g(m);
  std::vector<std::vector<double>> H(m * m);
  for (int i = 0; i < m; ++i) g[i] = sample.grid_derivative(n, MultiIndex::unit(m, i));
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      H[i * m + j] = sample.grid_derivative(n, MultiIndex::pair(m, i, j));
      if (i != j) H[j * m + i] = H[i * m + j];
    }

  auto node_index = [&](const std::array<int, kMaxDim>& c) {
    std::size_t idx = 0;
    for (int i = 0; i < m; ++i) idx = idx * n + static_cast<std::size_t>(((c[i] % n) + n) % n);
    return idx;
  };
  auto node_coords = [&](std::size_t idx) {
    std::array<int, kMaxDim> c{};
    for (int i = m - 1; i >= 0; --i) {
      c[i] = static_cast<int>(idx % n);
      idx /= n;
    }
    return c;
  };

  // Seeds: centers of cells whose corner gradients, widened by a first-order
  // margin, can reach zero in every component.
  std::vector<Vec> seeds;
  std::vector<std::array<int, kMaxDim>> seed_cells;
  const int corners = 1 << m;
  for (std::size_t base = 0; base < total; ++base) {
    const auto c0 = node_coords(base);
    bool candidate = true;
    for (int i = 0; i < m && candidate; ++i) {
      double lo = INFINITY, hi = -INFINITY, margin = 0.0;
      for (int k = 0; k < corners; ++k) {
        auto c = c0;
        for (int d = 0; d < m; ++d) c[d] += (k >> d) & 1;
        const std::size_t idx = node_index(c);
        lo = std::min(lo, g[i][idx]);
        hi = std::max(hi, g[i][idx]);
        double lip = 0.0;
        for (int j = 0; j < m; ++j) lip += std::fabs(H[i * m + j][idx]);
        margin = std::max(margin, lip);
      }
      margin *= 0.75 * h;
      candidate = lo - margin <= 0.0 && hi + margin >= 0.0;
    }
    if (!candidate) continue;
    Vec x(m);
    for (int d = 0; d < m; ++d) x[d] = (c0[d] + 0.5) * h;
    seeds.push_back(x);
    seed_cells.push_back(c0);
  }
  const std::size_t cell_seeds = seeds.size();
  if (n <= 64) {
    for (std::size_t idx = 0; idx < total; ++idx) {
      const auto c = node_coords(idx);
      Vec x(m);
      for (int d = 0; d < m; ++d) x[d] = c[d] * h;
      seeds.push_back(x);
    }
  }

  std::vector<NewtonResult> found;
  found.reserve(seeds.size());
  auto run = [&](const Vec& x0) {
    ++diag.seeds;
    NewtonResult r = newton(sample, x0, tol, opt.max_newton_iter, h, 4.0 * h, hscale);
    if (!r.converged) ++diag.newton_failures;
    return r;
  };
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    NewtonResult r = run(seeds[s]);
    if (r.converged) found.push_back(r);
    if (s >= cell_seeds) continue;
    // A cell seed that escaped its cell may have skipped a point inside it;
    // retry from the corners.
    bool inside = r.converged;
    if (inside) {
      for (int d = 0; d < m; ++d) {
        double off = r.theta[d] - seeds[s][d];
        off -= std::nearbyint(off);
        if (std::fabs(off) > 0.6 * h) inside = false;
      }
    }
    if (inside) continue;
    for (int k = 0; k < corners; ++k) {
      Vec x(m);
      for (int d = 0; d < m; ++d) x[d] = (seed_cells[s][d] + ((k >> d) & 1)) * h;
      NewtonResult rc = run(x);
      if (rc.converged) found.push_back(rc);
    }
  }

  std::vector<CriticalPoint> points;
  for (const auto& r : found) {
    bool merged = false;
    for (auto& p : points) {
      if (torus_distance(p.theta, r.theta) < opt.dedup_tol) {
        if (r.residual < p.grad_residual) {
          p.theta = r.theta;
          p.grad_residual = r.residual;
        }
        merged = true;
        break;
      }
    }
    if (!merged) {
      CriticalPoint p;
      p.theta = r.theta;
      p.grad_residual = r.residual;
      points.push_back(p);
    }
  }
  std::sort(points.begin(), points.end(), [m](const CriticalPoint& a, const CriticalPoint& b) {
    for (int i = 0; i < m; ++i)
      if (a.theta[i] != b.theta[i]) return a.theta[i] < b.theta[i];
    return false;
  });
  const double det_floor = opt.hess_degeneracy_tol * std::pow(hscale, m);
  for (auto& p : points) {
    const Jet j = sample.eval_jet(p.theta, 2);
    Eigen::SelfAdjointEigenSolver<Mat> es(j.hess, Eigen::EigenvaluesOnly);
    p.hess_det = j.hess.determinant();
    p.morse_index = 0;
    for (int i = 0; i < m; ++i) p.morse_index += es.eigenvalues()[i] < 0.0;
    p.degenerate = std::fabs(p.hess_det) < det_floor;
    diag.degenerate += p.degenerate;
  }
  return CountingMeasure(m, sample.R(), std::move(points), diag);
}

int brute_force_count_1d(const FieldSample& sample, int grid_n) {
  if (sample.dim() != 1) throw Error(ErrorCode::invalid_argument, "brute_force_count_1d needs m = 1");
  if (sample.terms().empty()) return 0;
  const int n = std::max<int>(grid_n, 16 * static_cast<int>(sample.terms().size()));
  const auto g = sample.grid_derivative(n, MultiIndex::unit(1, 0));
  const double tiny = 1e-13 * std::sqrt(sample.grad_variance());
  bool all_zero = true;
  for (double v : g) all_zero = all_zero && std::fabs(v) <= tiny;
  if (all_zero) return 0;
  const MultiIndex d1 = MultiIndex::unit(1, 0);
  int count = 0;
  for (int i = 0; i < n; ++i) {
    const double a = g[i], b = g[(i + 1) % n];
    if (std::fabs(a) <= tiny && std::fabs(b) <= tiny)
      throw Error(ErrorCode::resolution, "resolution insufficient: F' vanishes at both ends of a grid interval");
    if ((a >= 0.0) == (b >= 0.0)) continue;
    ++count;
    // Refine the bracket; the count is already fixed, this localizes the root.
    Vec lo(1), hi(1);
    lo[0] = static_cast<double>(i) / n;
    hi[0] = static_cast<double>(i + 1) / n;
    const bool lo_pos = a >= 0.0;
    for (int it = 0; it < 40; ++it) {
      Vec mid = 0.5 * (lo + hi);
      if ((sample.derivative(mid, d1) >= 0.0) == lo_pos) lo = mid;
      else hi = mid;
    }
  }
  return count;
}

double pair_measure(const CountingMeasure& measure, const TestFunction& f) {
  if (f.dim() != measure.dim()) throw Error(ErrorCode::invalid_argument, "test function dimension mismatch");
  double s = 0.0;
  for (const auto& p : measure.points()) s += f(p.theta);
  return s;
}

}  // namespace critfield
