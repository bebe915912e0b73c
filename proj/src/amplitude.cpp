#include "critfield/amplitude.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace critfield {

namespace {

constexpr double kQuadTol = 1e-10;

double double_factorial_odd(int n) {  // (n)!! for odd n >= -1
  double r = 1.0;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_number(const std::string& s, std::string_view what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::invalid_argument,
                "cannot parse " + std::string(what) + " from '" + s + "'");
  }
}

}  // namespace

double sphere_area(int m) {
  check_dimension(m);
  return 2.0 * std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m);
}

double sphere_monomial(const MultiIndex& alpha) {
  if (alpha.any_odd()) return 0.0;
  const int m = alpha.dim();
  double num = 2.0;
  for (int i = 0; i < m; ++i) num *= std::tgamma(0.5 * (alpha[i] + 1));
  return num / std::tgamma(0.5 * (alpha.order() + m));
}

Amplitude Amplitude::gaussian(double s) {
  if (!(s > 0.0) || !std::isfinite(s))
    throw Error(ErrorCode::invalid_argument, "gaussian scale must be positive");
  return Amplitude(Gaussian{s});
}

Amplitude Amplitude::bump(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw Error(ErrorCode::invalid_argument, "bump radius must be positive");
  return Amplitude(Bump{radius});
}

Amplitude Amplitude::table(std::vector<double> x, std::vector<double> v,
                           std::optional<double> kappa) {
  if (x.size() != v.size() || x.size() < 2)
    throw Error(ErrorCode::invalid_argument, "amplitude table needs >= 2 (x, value) pairs");
  if (x.front() != 0.0)
    throw Error(ErrorCode::invalid_argument, "amplitude table must start at x = 0");
  if (v.front() != 1.0)
    throw Error(ErrorCode::invalid_argument, "amplitude must satisfy a(0) = 1");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1]))
      throw Error(ErrorCode::invalid_argument, "amplitude table abscissae must increase");
  for (double vi : v)
    if (!std::isfinite(vi)) throw Error(ErrorCode::invalid_argument, "non-finite table value");
  if (kappa && !(*kappa > 0.0))
    throw Error(ErrorCode::invalid_argument, "tail exponent must be positive");
  return Amplitude(Table{std::move(x), std::move(v), kappa, "inline"});
}

Amplitude Amplitude::load_table(const std::string& path, std::optional<double> kappa) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open amplitude table '" + path + "'");
  std::vector<double> xs, vs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto comma = t.find(',');
    if (comma == std::string::npos)
      throw Error(ErrorCode::io, path + ":" + std::to_string(lineno) + ": expected two columns");
    std::string a = trim(std::string_view(t).substr(0, comma));
    std::string b = trim(std::string_view(t).substr(comma + 1));
    char* end = nullptr;
    double xv = std::strtod(a.c_str(), &end);
    if (end == a.c_str()) {
      if (xs.empty()) continue;  // header
      throw Error(ErrorCode::io, path + ":" + std::to_string(lineno) + ": not a number");
    }
    xs.push_back(xv);
    vs.push_back(parse_number(b, "table value"));
  }
  Amplitude amp = table(std::move(xs), std::move(vs), kappa);
  std::get<Table>(amp.rep_).source = path;
  return amp;
}

Amplitude Amplitude::parse(std::string_view descriptor) {
  std::string d = trim(descriptor);
  auto open = d.find('(');
  if (open == std::string::npos || d.back() != ')')
    throw Error(ErrorCode::invalid_argument, "amplitude descriptor '" + d +
                                                 "' must look like gaussian(s), bump(r) or "
                                                 "table(path, kappa)");
  std::string name = trim(std::string_view(d).substr(0, open));
  std::string args = d.substr(open + 1, d.size() - open - 2);
  std::vector<std::string> parts;
  std::stringstream ss(args);
  std::string p;
  while (std::getline(ss, p, ',')) parts.push_back(trim(p));
  if (name == "gaussian" && parts.size() == 1) return gaussian(parse_number(parts[0], "scale"));
  if (name == "bump" && parts.size() == 1) return bump(parse_number(parts[0], "radius"));
  if (name == "table" && (parts.size() == 1 || parts.size() == 2)) {
    std::string path = parts[0];
    if (path.size() >= 2 && (path.front() == '"' || path.front() == '\''))
      path = path.substr(1, path.size() - 2);
    std::optional<double> kappa;
    if (parts.size() == 2) kappa = parse_number(parts[1], "tail exponent");
    return load_table(path, kappa);
  }
  throw Error(ErrorCode::invalid_argument, "unknown amplitude descriptor '" + d + "'");
}

Amplitude::Kind Amplitude::kind() const {
  if (std::holds_alternative<Gaussian>(rep_)) return Kind::gaussian;
  if (std::holds_alternative<Bump>(rep_)) return Kind::bump;
  return Kind::table;
}

double Amplitude::scale() const {
  if (auto g = std::get_if<Gaussian>(&rep_)) return g->s;
  if (auto b = std::get_if<Bump>(&rep_)) return b->radius;
  return std::get<Table>(rep_).x.back();
}

std::string Amplitude::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (auto g = std::get_if<Gaussian>(&rep_)) {
    os << "gaussian(" << g->s << ")";
  } else if (auto b = std::get_if<Bump>(&rep_)) {
    os << "bump(" << b->radius << ")";
  } else {
    const auto& t = std::get<Table>(rep_);
    os << "table(" << t.source;
    if (t.kappa) os << ", " << *t.kappa;
    os << ")";
  }
  return os.str();
}

double Amplitude::operator()(double x) const {
  x = std::fabs(x);
  if (auto g = std::get_if<Gaussian>(&rep_)) {
    const double u = x / g->s;
    return std::exp(-u * u);
  }
  if (auto b = std::get_if<Bump>(&rep_)) {
    const double u = x / b->radius;
    if (u >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
  }
  const auto& t = std::get<Table>(rep_);
  if (x >= t.x.back()) {
    if (!t.kappa) return x == t.x.back() ? t.v.back() : 0.0;
    const double xl = t.x.back();
    return t.v.back() * std::exp(-*t.kappa * (x * x - xl * xl));
  }
  auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - t.x.begin()) - 1;
  const double f = (x - t.x[i]) / (t.x[i + 1] - t.x[i]);
  return t.v[i] + f * (t.v[i + 1] - t.v[i]);
}

double Amplitude::spectral_weight(const Vec& xi) const {
  const double a = (*this)(xi.norm());
  return a * a;
}

double Amplitude::truncation_radius(double eps) const {
  if (!(eps > 0.0 && eps < 1.0))
    throw Error(ErrorCode::invalid_argument, "truncation eps must lie in (0,1)");
  if (auto g = std::get_if<Gaussian>(&rep_)) return g->s * std::sqrt(-std::log(eps));
  if (auto b = std::get_if<Bump>(&rep_)) return b->radius;
  const auto& t = std::get<Table>(rep_);
  if (!t.kappa) throw Error(ErrorCode::uncertified_tail, "uncertified tail");
  const double xl = t.x.back();
  const double vl = std::fabs(t.v.back());
  double L = xl;
  if (vl > eps) L = std::sqrt(xl * xl + std::log(vl / eps) / *t.kappa);
  else {
    // Walk back through the table while every node (hence every linear piece)
    // stays below eps.
    std::size_t i = t.x.size() - 1;
    while (i > 0 && std::fabs(t.v[i - 1]) <= eps) --i;
    L = t.x[i];
  }
  return L;
}

double Amplitude::effective_support() const {
  if (auto g = std::get_if<Gaussian>(&rep_)) return g->s * 27.5;  // exp(-2 x^2/s^2) underflows
  if (auto b = std::get_if<Bump>(&rep_)) return b->radius;
  const auto& t = std::get<Table>(rep_);
  if (!t.kappa) return t.x.back();
  const double xl = t.x.back();
  return std::sqrt(xl * xl + 750.0 / *t.kappa);
}

double Amplitude::radial_integral(int power) const {
  using boost::math::quadrature::gauss_kronrod;
  auto integrand = [&](double r) {
    const double a = (*this)(r);
    return std::pow(r, power) * a * a;
  };
  double total = 0.0, err_total = 0.0, l1_total = 0.0;
  auto add_piece = [&](double lo, double hi) {
    double err = 0.0, l1 = 0.0;
    total += gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 20, kQuadTol, &err, &l1);
    err_total += err;
    l1_total += l1;
  };
  if (auto t = std::get_if<Table>(&rep_)) {
    // Integrate piece by piece so the kinks of the interpolant sit on endpoints.
    for (std::size_t i = 0; i + 1 < t->x.size(); ++i) add_piece(t->x[i], t->x[i + 1]);
    if (t->kappa) add_piece(t->x.back(), effective_support());
  } else {
    add_piece(0.0, effective_support());
  }
  if (err_total > kQuadTol * std::max(std::fabs(total), 1e-300) && err_total > 1e-15 * l1_total) {
    std::ostringstream os;
    os << "radial quadrature did not converge (residual estimate " << err_total << ")";
    throw Error(ErrorCode::quadrature, os.str());
  }
  return total;
}

double Amplitude::spectral_moment(const MultiIndex& alpha, bool force_quadrature) const {
  if (alpha.any_odd()) return 0.0;
  const int m = alpha.dim();
  if (alpha.order() > 8)
    throw Error(ErrorCode::unsupported, "spectral moments are limited to |alpha| <= 8");
  if (auto g = std::get_if<Gaussian>(&rep_); g && !force_quadrature) {
    // w(xi) = exp(-|xi|^2 / (2 sigma^2)) with sigma = s/2; the integral factors
    // into one-dimensional Gaussian moments.
    const double sigma = 0.5 * g->s;
    double r = 1.0;
    for (int i = 0; i < m; ++i) {
      const int a = alpha[i];
      r *= std::sqrt(2.0 * std::numbers::pi) * std::pow(sigma, a + 1) *
           double_factorial_odd(a - 1) / (2.0 * std::numbers::pi);
    }
    return r;
  }
  const double radial = radial_integral(alpha.order() + m - 1);
  return std::pow(2.0 * std::numbers::pi, -m) * sphere_monomial(alpha) * radial;
}

}  // namespace critfield
