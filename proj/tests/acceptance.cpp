// Acceptance run: one PASS/FAIL line per criterion. Exit status is 0 only
// when every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "critfield/ampleness.hpp"
#include "critfield/critical_finder.hpp"
#include "critfield/experiments.hpp"
#include "critfield/kac_rice.hpp"
#include "critfield/parallel.hpp"

using namespace critfield;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Vec axis(int m, double t) {
  Vec v = Vec::Zero(m);
  v[0] = t;
  return v;
}

bool same_bits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

GaussianSpec swap_points(const GaussianSpec& g) {
  std::vector<int> perm;
  for (const auto& l : g.labels) {
    std::string other = l;
    other[0] = l[0] == 'x' ? 'y' : 'x';
    for (int j = 0; j < g.size(); ++j)
      if (g.labels[j] == other) perm.push_back(j);
  }
  return g.select(perm);
}

const double kRiceC1 = std::sqrt(3.0) / (2.0 * std::numbers::pi);

// 1. Mean density at R = 20.
Outcome mean_density() {
  ExperimentConfig cfg;
  cfg.R = {20};
  cfg.trials = 2000;
  cfg.test_function = "indicator(full)";
  const Report rep = run_command("stats", cfg);
  const double mean = rep.get("mean_scaled_R20"), mean_se = rep.get("mean_scaled_se_R20");
  const double C = rep.get("C_m"), C_se = rep.get("C_m_se");
  const double se = std::hypot(mean_se, C_se);
  const double rel = std::fabs(C / kRiceC1 - 1.0);
  const bool ok = std::fabs(mean - C) <= 3.0 * se && rel < 0.01;
  return {ok, fmt("mean/R = %.5f +- %.5f, C_1 = %.5f +- %.5f (|diff| = %.2f se), C_1 vs Rice %.5f: %.3f%%", mean,
                  mean_se, C, C_se, std::fabs(mean - C) / se, kRiceC1, 100.0 * rel)};
}

// 2. Variance scaling in m = 1.
Outcome variance_scaling_1d() {
  ExperimentConfig cfg;
  cfg.R = {8, 16, 32, 64};
  cfg.trials = 2000;
  cfg.test_function = "bump(0.25)";
  const Report rep = run_command("scaling", cfg);
  const double slope = rep.get("slope"), slope_se = rep.get("slope_se");
  const double icpt = rep.get("intercept"), ref = rep.get("log_V_f_sq");
  const bool slope_ok = slope >= 0.85 && slope <= 1.15;
  const bool icpt_ok = std::fabs(icpt - ref) <= 0.1 * std::fabs(ref);
  return {slope_ok && icpt_ok,
          fmt("slope = %.4f +- %.4f in [0.85, 1.15]: %s; intercept = %.4f vs log(V_1 int f^2) = %.4f, |diff| = %.3f "
              "(limit %.3f): %s; slope-1 intercept = %.4f; V_1 = %.5f",
              slope, slope_se, slope_ok ? "yes" : "no", icpt, ref, std::fabs(icpt - ref), 0.1 * std::fabs(ref),
              icpt_ok ? "yes" : "no", rep.get("fixed_slope_intercept"), rep.get("V_m"))};
}

// 3. Variance scaling in m = 2.
Outcome variance_scaling_2d() {
  ExperimentConfig cfg;
  cfg.m = 2;
  cfg.R = {4, 8, 16};
  cfg.trials = 500;
  cfg.test_function = "bump(0.25)";
  const StudyResult res = run_mc_stats(cfg);
  std::vector<double> R, v, se;
  for (const auto& r : res.rows) {
    R.push_back(r.R);
    v.push_back(r.var);
    se.push_back(r.var_se);
  }
  const ScalingFit fit = scaling_fit(R, v, se, 2.0);
  std::string vars;
  for (const auto& r : res.rows) vars += fmt(" R=%g: %.4g", r.R, r.var);
  return {fit.slope >= 1.7 && fit.slope <= 2.3,
          fmt("slope = %.4f +- %.4f in [1.7, 2.3]; Var:%s", fit.slope, fit.slope_se, vars.c_str())};
}

// 4. Law of large numbers trend in m = 2.
Outcome lln_trend() {
  ExperimentConfig cfg;
  cfg.m = 2;
  cfg.N = {4, 8, 16, 24};
  cfg.streams = 20;
  cfg.test_function = "indicator(full)";
  const LlnResult res = lln_trajectory(cfg);
  bool decreasing = true;
  std::string devs;
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    if (i && res.rows[i].rel_max_dev > res.rows[i - 1].rel_max_dev) decreasing = false;
    devs += fmt(" N=%g: %.3f", res.rows[i].N, res.rows[i].rel_max_dev);
  }
  const double last = res.rows.back().rel_max_dev;

  cfg.test_function = "bump(0.25)";
  const LlnResult bump = lln_trajectory(cfg);
  std::string bdevs;
  for (const auto& r : bump.rows) bdevs += fmt(" %.3f", r.rel_max_dev);

  return {decreasing && last < 0.15,
          fmt("relative max deviation over 20 streams:%s; decreasing: %s; final %.3f < 0.15: %s "
              "(C_2 = %.5f; bump(0.25) for information:%s)",
              devs.c_str(), decreasing ? "yes" : "no", last, last < 0.15 ? "yes" : "no", res.C.value, bdevs.c_str())};
}

// 5. Lattice trig sums against image sums.
Outcome poisson() {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto a = Amplitude::gaussian(1.0);
  double worst = 0.0;
  for (int m = 1; m <= 2; ++m)
    for (double R : {4.0, 8.0}) {
      const auto spec = LatticeSpectrum::build(a, m, R);
      for (int i = 0; i < 20; ++i) {
        Vec z(m);
        for (int j = 0; j < m; ++j) z[j] = R * u(gen);
        worst = std::max(worst, std::fabs(kernel_deriv_lattice(spec, z, MultiIndex(m)) - kernel_poisson(a, m, R, z)));
      }
    }
  return {worst <= 1e-9, fmt("max |K_R - image sum| over 80 points = %.3e (limit 1e-9)", worst)};
}

// 6. Kernel gap against its bound.
Outcome kernel_gap() {
  ExperimentConfig cfg;
  cfg.R = {8, 16, 32};
  const Report rep = run_command("kernel", cfg);
  bool ok = true;
  double pg = INFINITY, pb = INFINITY;
  std::string s;
  for (const char* R : {"8", "16", "32"}) {
    const double g = rep.get(std::string("gap_R") + R), b = rep.get(std::string("gap_bound_R") + R);
    ok = ok && g <= b && g < pg && b < pb;
    pg = g;
    pb = b;
    s += fmt(" R=%s: gap %.3e <= bound %.3e;", R, g, b);
  }
  return {ok, "C^2 gap on R B, r0 = 0.9:" + s + (ok ? " both decrease" : " not monotone or bound exceeded")};
}

// 7. Newton finder against 1D sign changes.
Outcome oracle_equivalence() {
  int mismatches = 0, total = 0;
  for (double R : {8.0, 16.0}) {
    const auto spec = LatticeSpectrum::build(Amplitude::gaussian(1.0), 1, R);
    for (int t = 0; t < 100; ++t) {
      const auto f = FieldSample::draw(spec, trial_seed(1, R, t, 0));
      const auto cm = find_critical_points(f, FinderOptions{});
      total += static_cast<int>(cm.size());
      if (static_cast<int>(cm.size()) != brute_force_count_1d(f, 0)) ++mismatches;
    }
  }
  return {mismatches == 0, fmt("200 samples (R = 8, 16), %d points, %d mismatches", total, mismatches)};
}

// 8. Euler characteristic on T^2.
Outcome euler() {
  const auto spec = LatticeSpectrum::build(Amplitude::gaussian(1.0), 2, 8.0);
  std::vector<int> chi(200), morse(200);
  parallel_for(200, [&](std::size_t t) {
    const auto cm = find_critical_points(FieldSample::draw(spec, trial_seed(1, 8.0, static_cast<int>(t), 0)),
                                         FinderOptions{});
    chi[t] = cm.euler_characteristic();
    morse[t] = cm.morse();
  });
  int clean = 0, bad = 0;
  for (int t = 0; t < 200; ++t)
    if (morse[t]) {
      ++clean;
      if (chi[t] != 0) ++bad;
    }
  return {bad == 0 && clean > 0, fmt("%d Morse samples of 200, %d with nonzero Euler sum", clean, bad)};
}

// 9. Two-point structure.
Outcome two_point() {
  const int m = 2;
  const ContinuumKernel k(Amplitude::gaussian(1.0), m);
  const Estimate rho = one_point_density(k, 200000, 91);
  Vec dir(2);
  dir << 0.6, 0.8;
  bool ok = true;
  std::string s;
  for (double t : {0.5, 1.0, 2.0, 4.0, 10.0}) {
    const auto rep = two_point_density(k, t * dir, 100000, 92);
    const double se = std::hypot(rep.rho_tilde.std_error, 2.0 * rho.value * rho.std_error);
    const double zs = std::fabs(rep.rho_tilde.value - rho.value * rho.value) / se;
    ok = ok && zs <= 3.0;
    s += fmt(" %.2f", zs);
  }
  // -z exchanges the two points: equal matrices after swapping labels, and
  // two_point_density canonicalizes the sign so the estimates coincide.
  const Vec z = 1.3 * dir;
  const bool parity = same_bits(swap_points(pair_covariance(k, z)).cov, pair_covariance(k, -z).cov) &&
                      two_point_density(k, z, 20000, 5).rho_hat.value ==
                          two_point_density(k, -z, 20000, 5).rho_hat.value;
  // Dyadic separation and translations keep y - x exact in floating point.
  Vec zd(2);
  zd << 0.75, -0.625;
  std::mt19937_64 gen(7);
  const auto base = pair_covariance(k, Vec::Zero(2), zd).cov;
  bool translation = true;
  for (int i = 0; i < 10; ++i) {
    Vec t(2);
    t << static_cast<double>(gen() % 1280) / 64.0 - 10.0, static_cast<double>(gen() % 1280) / 64.0 - 10.0;
    translation = translation && same_bits(pair_covariance(k, t, zd + t).cov, base);
  }
  return {ok && parity && translation,
          fmt("|rho_tilde - rho^2| / se at |z| = 0.5..10:%s (limit 3); parity bitwise: %s; translation bitwise: %s",
              s.c_str(), parity ? "yes" : "no", translation ? "yes" : "no")};
}

// 10. Blow-up boundedness and gauge consistency.
Outcome blow_up() {
  bool ok = true;
  std::string s;
  for (int m = 1; m <= 2; ++m) {
    const ContinuumKernel k(Amplitude::gaussian(1.0), m);
    const Vec nu = axis(m, 1.0);
    double lo = INFINITY, hi = 0.0;
    for (double r : {1e-1, 1e-2, 1e-3}) {
      const double w = blow_up_density(k, r, nu, 100000, 100 + m).w.value;
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
    const Estimate g = blow_up_density(k, 0.5, nu, 100000, 200 + m).rho_hat;
    const Estimate d = two_point_density(k, 0.5 * nu, 100000, 300 + m).rho_hat;
    const double zs = std::fabs(g.value - d.value) / std::hypot(g.std_error, d.std_error);
    ok = ok && hi / lo < 2.0 && zs <= 3.0;
    s += fmt(" m=%d: w in [%.5g, %.5g], ratio %.4f; gauge vs direct at r=0.5: %.2f se;", m, lo, hi, hi / lo, zs);
  }
  return {ok, s.substr(1)};
}

// 11. Regression formula against sampled conditioning.
Outcome regression() {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd B(4, 4);
  for (int i = 0; i < 16; ++i) B(i / 4, i % 4) = nd(gen);
  const Eigen::MatrixXd S = B * B.transpose() + 0.5 * Eigen::MatrixXd::Identity(4, 4);
  const Eigen::MatrixXd C = regression_covariance(S.block(2, 2, 2, 2), S.block(2, 0, 2, 2), S.block(0, 0, 2, 2));
  const Eigen::MatrixXd L = S.llt().matrixL();
  const long n = 1000000;
  Eigen::Matrix4d acc = Eigen::Matrix4d::Zero();
  Eigen::Vector4d z;
  for (long k = 0; k < n; ++k) {
    for (int i = 0; i < 4; ++i) z[i] = nd(gen);
    const Eigen::Vector4d x = L * z;
    acc.noalias() += x * x.transpose();
  }
  const Eigen::Matrix4d E = acc / static_cast<double>(n);
  // Residual covariance of X2 after least squares on X1.
  const Eigen::Matrix2d emp = E.block(2, 2, 2, 2) - E.block(2, 0, 2, 2) * E.block(0, 0, 2, 2).inverse() * E.block(0, 2, 2, 2);
  double worst = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      const double se = std::sqrt((C(i, i) * C(j, j) + C(i, j) * C(i, j)) / n);
      worst = std::max(worst, std::fabs(emp(i, j) - C(i, j)) / se);
    }
  return {worst <= 4.0, fmt("4-dimensional instance, 1e6 samples: worst entry %.2f se (limit 4)", worst)};
}

// 12. Hoelder continuity exponent.
Outcome holder() {
  const int m = 2;
  const Eigen::MatrixXd A0 = Eigen::MatrixXd::Identity(3, 3);
  Eigen::MatrixXd E(3, 3);
  E << 0.8, 0.3, -0.2, 0.3, -0.5, 0.1, -0.2, 0.1, 0.6;
  std::vector<double> x, y;
  for (double t : {1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4}) {
    const auto h = holder_continuity_check(A0, A0 + t * E, m, 200000, 12);
    x.push_back(std::log((t * E).norm()));
    y.push_back(std::log(h.lhs.value));
  }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope >= 0.5, fmt("log-log exponent of |I_A - I_A0| against ||A - A0|| = %.4f (need >= 0.5)", slope)};
}

// 13. Byte-identical outputs under 1, 4 and 8 threads.
std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome reproducibility(const fs::path& work) {
  ExperimentConfig base;
  base.R = {12};
  base.trials = 100;
  base.n_mc = 50000;
  base.n_mc_pair = 20000;
  base.cf_trials = 40;
  base.streams = 5;
  base.N = {4, 8};
  struct Run {
    std::string command;
    int m;
  };
  const std::vector<Run> runs = {{"stats", 1}, {"crit", 2}, {"kr-one", 2}, {"kr-two", 1}, {"blowup", 1}, {"lln", 2}};
  std::size_t files = 0;
  std::vector<std::string> diffs;
  for (const auto& run : runs) {
    ExperimentConfig cfg = base;
    cfg.m = run.m;
    std::vector<std::vector<std::pair<std::string, std::string>>> outputs;
    for (int threads : {1, 4, 8}) {
      set_max_threads(threads);
      const fs::path dir = work / (run.command + "_t" + std::to_string(threads));
      fs::remove_all(dir);
      const Report rep = run_command(run.command, cfg);
      std::vector<std::pair<std::string, std::string>> contents;
      for (const auto& p : write_report(rep, cfg, dir.string()))
        contents.emplace_back(fs::path(p).filename().string(), read_file(p));
      outputs.push_back(contents);
    }
    files += outputs[0].size();
    for (std::size_t t = 1; t < outputs.size(); ++t)
      if (outputs[t] != outputs[0]) diffs.push_back(run.command);
  }
  set_max_threads(0);
  std::string s = fmt("%zu files from 6 studies compared across 1, 4, 8 threads", files);
  if (!diffs.empty()) {
    s += "; differing:";
    for (const auto& d : diffs) s += " " + d;
  }
  return {diffs.empty(), s};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "critfield_acceptance";
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"mean density", mean_density},
      {"variance scaling m=1", variance_scaling_1d},
      {"variance scaling m=2", variance_scaling_2d},
      {"LLN trend m=2", lln_trend},
      {"Poisson summation", poisson},
      {"kernel gap", kernel_gap},
      {"oracle equivalence", oracle_equivalence},
      {"Euler characteristic", euler},
      {"two-point structure", two_point},
      {"blow-up boundedness", blow_up},
      {"regression formula", regression},
      {"Hoelder continuity", holder},
      {"reproducibility", [&] { return reproducibility(work); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("criterion %2zu %-22s %s  (%.1fs) %s\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed ? 1 : 0;
}
