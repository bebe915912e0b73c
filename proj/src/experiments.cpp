#include "critfield/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "critfield/ampleness.hpp"
#include "critfield/parallel.hpp"
#include "critfield/rng.hpp"
#include "critfield/sampler.hpp"

namespace critfield {

namespace {

// Stream tags that keep the independent random inputs of a run apart.
enum : std::uint64_t {
  kTagTrials = 0,
  kTagBlowupTrials = 1,
  kTagLln = 2,
  kTagOnePoint = 101,
  kTagPair = 102,
  kTagConsts = 103,
  kTagBlowup = 104,
  kTagBootstrap = 105,
};

std::uint64_t sub_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t i = 0) {
  return rng::mix({master, tag, i});
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return std::nan("");
  const double pos = q * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

Vec axis(int m) {
  Vec e = Vec::Zero(m);
  e[0] = 1.0;
  return e;
}

Amplitude study_amplitude(const ExperimentConfig& cfg) { return Amplitude::parse(cfg.amplitude); }

Estimate continuum_C(const ExperimentConfig& cfg) {
  const ContinuumKernel k(study_amplitude(cfg), cfg.m);
  return one_point_density(k, cfg.n_mc, sub_seed(cfg.seed, kTagOnePoint));
}

/// Frobenius norm of the symmetric tensor D^k Phi from its distinct entries.
double tensor_norm(const FieldSample& f, const Vec& theta, int order, double scale) {
  const int m = f.dim();
  double s = 0.0;
  for (const auto& a : multi_indices_up_to(m, order)) {
    if (a.order() != order) continue;
    double mult = std::tgamma(order + 1.0);
    for (int i = 0; i < m; ++i) mult /= std::tgamma(a[i] + 1.0);
    const double d = f.derivative(theta, a) * scale;
    s += mult * d * d;
  }
  return std::sqrt(s);
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t master, double R, int trial, int stream) {
  return rng::mix({master, rng::double_bits(R), static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(stream)});
}

LatticeSpectrum study_spectrum(const ExperimentConfig& cfg, double R) {
  auto spec = LatticeSpectrum::build(study_amplitude(cfg), cfg.m, R, cfg.eps_trunc);
  if (cfg.modes >= 0) return spec.first_modes(static_cast<std::size_t>(cfg.modes));
  return spec;
}

FinderOptions finder_options(const ExperimentConfig& cfg) {
  FinderOptions o;
  o.grid_n = cfg.grid_n;
  o.newton_tol = cfg.newton_tol;
  o.dedup_tol = cfg.dedup_tol;
  o.max_newton_iter = cfg.max_newton_iter;
  return o;
}

void ampleness_gate(const ExperimentConfig& cfg, double R) {
  const auto scan = ampleness_scan(study_amplitude(cfg), cfg.m, {R}, cfg.jet_order, cfg.z_points, cfg.eps_trunc,
                                   cfg.modes);
  const auto& row = scan.rows.front();
  if (row.pass) return;
  std::string why = !row.jet.pass ? "jet min eigenvalue " + num(row.jet.min_eigenvalue)
                                  : "pair min eigenvalue " + num(row.worst_pair.min_eigenvalue) + " at |z|=" +
                                        num(row.worst_pair.z.norm());
  throw Error(ErrorCode::invariant, "ampleness gate failed at R=" + num(R) + " (" + why + ")");
}

// ---------------------------------------------------------------------------

double sample_variance(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 2) throw Error(ErrorCode::invalid_argument, "variance needs at least 2 values");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / (n - 1);
}

double jackknife_variance_se(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 3) throw Error(ErrorCode::invalid_argument, "jackknife needs at least 3 values");
  // Centre first so the leave-one-out sums do not cancel.
  double c = 0.0;
  for (double v : x) c += v;
  c /= n;
  double s1 = 0.0, s2 = 0.0;
  for (double v : x) {
    s1 += v - c;
    s2 += (v - c) * (v - c);
  }
  std::vector<double> loo(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i] - c;
    const double a = s1 - xi;
    loo[i] = ((s2 - xi * xi) - a * a / (n - 1)) / (n - 2);
    mean += loo[i];
  }
  mean /= n;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return std::sqrt(ss * (n - 1) / n);
}

double bootstrap_variance_se(const std::vector<double>& x, int B, std::uint64_t seed) {
  const std::size_t n = x.size();
  if (n < 2 || B < 2) throw Error(ErrorCode::invalid_argument, "bootstrap needs n >= 2 and B >= 2");
  std::vector<double> reps(B), draw(n);
  for (int b = 0; b < B; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t h = rng::mix({seed, static_cast<std::uint64_t>(b), i});
      draw[i] = x[static_cast<std::size_t>(rng::to_open_unit(h) * n)];
    }
    reps[b] = sample_variance(draw);
  }
  return std::sqrt(sample_variance(reps));
}

StudyResult run_mc_stats(const ExperimentConfig& cfg) {
  cfg.validate();
  StudyResult res;
  res.m = cfg.m;
  const TestFunction f = TestFunction::parse(cfg.test_function, cfg.m);
  res.f_int = f.integral();
  res.f_sq_int = f.integral_sq();
  const FinderOptions opt = finder_options(cfg);

  std::vector<LatticeSpectrum> spectra;
  for (double R : cfg.R) {
    ampleness_gate(cfg, R);
    spectra.push_back(study_spectrum(cfg, R));
  }

  const std::size_t per = static_cast<std::size_t>(cfg.trials);
  res.trials.resize(cfg.R.size() * per);
  parallel_for(res.trials.size(), [&](std::size_t idx) {
    const std::size_t ri = idx / per;
    const int t = static_cast<int>(idx % per);
    const double R = cfg.R[ri];
    TrialRecord rec;
    rec.R = R;
    rec.trial = t;
    rec.seed = trial_seed(cfg.seed, R, t, kTagTrials);
    const FieldSample sample = FieldSample::draw(spectra[ri], rec.seed);
    const CountingMeasure cm = find_critical_points(sample, opt);
    rec.points = static_cast<long>(cm.size());
    rec.value = pair_measure(cm, f);
    rec.euler = cm.euler_characteristic();
    rec.morse = cm.morse();
    rec.newton_failures = cm.diagnostics().newton_failures;
    res.trials[idx] = rec;
  });

  for (std::size_t ri = 0; ri < cfg.R.size(); ++ri) {
    StatsRow row;
    row.R = cfg.R[ri];
    std::vector<double> vals;
    for (std::size_t t = 0; t < per; ++t) {
      const auto& rec = res.trials[ri * per + t];
      if (rec.morse)
        vals.push_back(rec.value);
      else
        ++row.excluded;
    }
    row.trials = static_cast<long>(vals.size());
    if (100 * row.excluded > static_cast<long>(per))
      throw Error(ErrorCode::invariant, "too many non-Morse trials at R=" + num(row.R) + ": " +
                                            std::to_string(row.excluded) + " of " + std::to_string(per));
    if (row.excluded > 0)
      res.warnings.push_back("R=" + num(row.R) + ": excluded " + std::to_string(row.excluded) + " non-Morse trials");
    if (vals.size() < 3) throw Error(ErrorCode::invariant, "fewer than 3 usable trials at R=" + num(row.R));
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    row.mean = mean;
    row.var = sample_variance(vals);
    row.mean_se = std::sqrt(row.var / vals.size());
    row.var_se = jackknife_variance_se(vals);
    row.var_se_boot = bootstrap_variance_se(vals, 200, sub_seed(cfg.seed, kTagBootstrap, ri));
    res.rows.push_back(row);
  }
  return res;
}

ScalingFit scaling_fit(const std::vector<double>& R, const std::vector<double>& var, const std::vector<double>& var_se,
                       double fixed_slope) {
  if (R.size() != var.size() || R.size() != var_se.size())
    throw Error(ErrorCode::invalid_argument, "scaling_fit: inputs differ in length");
  ScalingFit fit;
  fit.fixed_slope = fixed_slope;
  std::vector<double> x, y, s;
  for (std::size_t i = 0; i < R.size(); ++i) {
    if (!(var[i] > 0.0) || !(R[i] > 0.0)) {
      fit.warnings.push_back("dropped R=" + num(R[i]) + ": nonpositive variance estimate");
      continue;
    }
    x.push_back(std::log(R[i]));
    y.push_back(std::log(var[i]));
    s.push_back(var_se[i] / var[i]);
    fit.R_used.push_back(R[i]);
  }
  std::vector<double> distinct = fit.R_used;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) throw Error(ErrorCode::invalid_argument, "scaling_fit needs at least 3 distinct R");

  const double n = static_cast<double>(x.size());
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= n;
  ym /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  double vs = 0.0, vi = 0.0, vf = 0.0, fi = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cs = (x[i] - xm) / sxx;
    const double ci = 1.0 / n - xm * cs;
    vs += cs * cs * s[i] * s[i];
    vi += ci * ci * s[i] * s[i];
    vf += s[i] * s[i] / (n * n);
    fi += (y[i] - fixed_slope * x[i]) / n;
  }
  fit.slope_se = std::sqrt(vs);
  fit.intercept_se = std::sqrt(vi);
  fit.fixed_intercept = fi;
  fit.fixed_intercept_se = std::sqrt(vf);
  return fit;
}

LlnResult lln_trajectory(const ExperimentConfig& cfg) {
  cfg.validate();
  LlnResult res;
  res.m = cfg.m;
  res.l2_only = cfg.m == 1;
  const TestFunction f = TestFunction::parse(cfg.test_function, cfg.m);
  res.f_int = f.integral();
  res.C = continuum_C(cfg);
  res.reference = res.C.value * res.f_int;
  const FinderOptions opt = finder_options(cfg);

  std::vector<LatticeSpectrum> spectra;
  for (double N : cfg.N) {
    ampleness_gate(cfg, N);
    spectra.push_back(study_spectrum(cfg, N));
  }
  const std::size_t S = static_cast<std::size_t>(cfg.streams);
  for (std::size_t s = 0; s < S; ++s) res.stream_seeds.push_back(sub_seed(cfg.seed, kTagLln, s));

  std::vector<double> vals(cfg.N.size() * S);
  parallel_for(vals.size(), [&](std::size_t idx) {
    const std::size_t ni = idx / S, s = idx % S;
    const FieldSample sample = FieldSample::draw(spectra[ni], res.stream_seeds[s]);
    const CountingMeasure cm = find_critical_points(sample, opt);
    vals[idx] = pair_measure(cm, f) * std::pow(cfg.N[ni], -cfg.m);
  });

  for (std::size_t ni = 0; ni < cfg.N.size(); ++ni) {
    LlnRow row;
    row.N = cfg.N[ni];
    row.values.assign(vals.begin() + ni * S, vals.begin() + (ni + 1) * S);
    row.p25 = percentile(row.values, 0.25);
    row.p50 = percentile(row.values, 0.50);
    row.p75 = percentile(row.values, 0.75);
    row.iqr = row.p75 - row.p25;
    for (double v : row.values) row.max_dev = std::max(row.max_dev, std::fabs(v - res.reference));
    row.rel_max_dev = res.reference != 0.0 ? row.max_dev / std::fabs(res.reference) : row.max_dev;
    res.rows.push_back(row);
  }
  return res;
}

BlowupStudy blowup_bound_study(const ExperimentConfig& cfg) {
  cfg.validate();
  BlowupStudy st;
  st.m = cfg.m;
  const Amplitude amp = study_amplitude(cfg);
  const ContinuumKernel kernel(amp, cfg.m);
  const Vec nu = axis(cfg.m);

  st.w.resize(cfg.r.size());
  st.w_refined.resize(cfg.r.size());
  parallel_for(2 * cfg.r.size(), [&](std::size_t idx) {
    const std::size_t i = idx / 2;
    const bool refined = idx % 2;
    const double r = refined ? 0.5 * cfg.r[i] : cfg.r[i];
    auto rep = blow_up_density(kernel, r, nu, cfg.n_mc_pair, sub_seed(cfg.seed, kTagBlowup, idx));
    (refined ? st.w_refined : st.w)[i] = rep;
  });
  st.gauge_half = blow_up_density(kernel, 0.5, nu, cfg.n_mc_pair, sub_seed(cfg.seed, kTagBlowup, 1000)).rho_hat;
  st.direct_half = two_point_density(kernel, 0.5 * nu, cfg.n_mc_pair, sub_seed(cfg.seed, kTagBlowup, 1001)).rho_hat;

  // C_F on the unit box of the rescaled coordinates x = R theta.
  st.cf_R = cfg.R.front();
  const double R = st.cf_R;
  const LatticeSpectrum spec = study_spectrum(cfg, R);
  const int g = cfg.cf_grid;
  std::size_t npts = 1;
  for (int i = 0; i < cfg.m; ++i) npts *= static_cast<std::size_t>(g);
  std::vector<double> cf(static_cast<std::size_t>(cfg.cf_trials));
  parallel_for(cf.size(), [&](std::size_t t) {
    const FieldSample sample = FieldSample::draw(spec, trial_seed(cfg.seed, R, static_cast<int>(t), kTagBlowupTrials));
    double sup = 0.0;
    for (std::size_t p = 0; p < npts; ++p) {
      Vec theta(cfg.m);
      std::size_t rest = p;
      for (int i = cfg.m - 1; i >= 0; --i) {
        theta[i] = static_cast<double>(rest % g) / (g - 1) / R;
        rest /= g;
      }
      double v = 0.0;
      for (int k = 1; k <= 3; ++k) v += tensor_norm(sample, theta, k, std::pow(R, -k));
      sup = std::max(sup, v);
    }
    cf[t] = sup;
  });
  auto moment = [&](int p, std::size_t n) {
    std::vector<double> v(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = std::pow(cf[i], p);
      mean += v[i];
    }
    mean /= n;
    Estimate e;
    e.value = mean;
    e.std_error = std::sqrt(sample_variance(v) / n);
    e.samples = static_cast<long>(n);
    e.method = "monte_carlo";
    return e;
  };
  for (int p : st.p) {
    st.cf_moment.push_back(moment(p, cf.size()));
    st.cf_moment_half.push_back(moment(p, cf.size() / 2));
  }
  double sup_w = 0.0;
  for (const auto& w : st.w) sup_w = std::max(sup_w, std::fabs(w.w.value));
  for (const auto& w : st.w_refined) sup_w = std::max(sup_w, std::fabs(w.w.value));
  st.K_observed = sup_w / st.cf_moment.front().value;
  return st;
}

// ---------------------------------------------------------------------------
// Command dispatch.

namespace {

Report cmd_sample(const ExperimentConfig& cfg) {
  Report rep;
  const double R = cfg.R.front();
  const std::uint64_t seed = trial_seed(cfg.seed, R, 0, kTagTrials);
  const FieldSample f = FieldSample::draw(study_spectrum(cfg, R), seed);
  const int m = cfg.m;
  Table coef{"coefficients", {}, {}, {}};
  for (int i = 0; i < m; ++i) coef.columns.push_back("l" + std::to_string(i + 1));
  for (const char* c : {"A", "B", "c", "s"}) coef.columns.push_back(c);
  {
    std::vector<double> row(m, 0.0);
    row.insert(row.end(), {f.A0(), 0.0, f.c0(), 0.0});
    coef.rows.push_back(row);
  }
  for (const auto& t : f.terms()) {
    std::vector<double> row;
    for (int i = 0; i < m; ++i) row.push_back(t.ell[i]);
    row.insert(row.end(), {t.A, t.B, t.c, t.s});
    coef.rows.push_back(row);
  }
  const int n = auto_grid_size(f, cfg.grid_n);
  Table grid{"grid", {}, {}, {}};
  for (int i = 0; i < m; ++i) grid.columns.push_back("theta" + std::to_string(i + 1));
  grid.columns.push_back("value");
  const auto values = f.grid_values(n);
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    std::vector<double> row(m);
    std::size_t rest = idx;
    for (int i = m - 1; i >= 0; --i) {
      row[i] = static_cast<double>(rest % n) / n;
      rest /= n;
    }
    row.push_back(values[idx]);
    grid.rows.push_back(row);
  }
  rep.tables = {coef, grid};
  rep.scalar("R", R);
  rep.scalar("modes", static_cast<double>(f.terms().size()));
  rep.scalar("max_index", f.max_index());
  rep.scalar("grid_n", n);
  rep.scalar("truncation_variance_bound", f.truncation_variance_bound());
  rep.notes.push_back("field seed " + std::to_string(seed));
  return rep;
}

Report cmd_crit(const ExperimentConfig& cfg) {
  Report rep;
  const double R = cfg.R.front();
  const std::uint64_t seed = trial_seed(cfg.seed, R, 0, kTagTrials);
  const FieldSample f = FieldSample::draw(study_spectrum(cfg, R), seed);
  const CountingMeasure cm = find_critical_points(f, finder_options(cfg));
  const TestFunction tf = TestFunction::parse(cfg.test_function, cfg.m);
  Table t{"critical_points", {}, {}, {}};
  for (int i = 0; i < cfg.m; ++i) t.columns.push_back("theta" + std::to_string(i + 1));
  for (const char* c : {"grad_residual", "hess_det", "morse_index", "degenerate", "f"}) t.columns.push_back(c);
  for (const auto& p : cm.points()) {
    std::vector<double> row(p.theta.data(), p.theta.data() + cfg.m);
    row.insert(row.end(), {p.grad_residual, p.hess_det, static_cast<double>(p.morse_index),
                           p.degenerate ? 1.0 : 0.0, tf(p.theta)});
    t.rows.push_back(row);
  }
  rep.tables = {t};
  const auto& d = cm.diagnostics();
  rep.scalar("R", R);
  rep.scalar("critical_points", static_cast<double>(cm.size()));
  rep.scalar("Z_f", pair_measure(cm, tf));
  rep.scalar("euler_characteristic", cm.euler_characteristic());
  for (int k = 0; k <= cfg.m; ++k) rep.scalar("index_" + std::to_string(k), cm.count_index(k));
  rep.scalar("grid_n", d.grid_n);
  rep.scalar("seeds", static_cast<double>(d.seeds));
  rep.scalar("newton_failures", static_cast<double>(d.newton_failures));
  rep.scalar("degenerate", static_cast<double>(d.degenerate));
  if (cfg.m == 1) rep.scalar("sign_change_count", brute_force_count_1d(f, 0));
  rep.notes.push_back("field seed " + std::to_string(seed));
  if (!cm.morse()) rep.notes.push_back("sample is not Morse at the configured tolerance");
  return rep;
}

Report cmd_kernel(const ExperimentConfig& cfg) {
  Report rep;
  const Amplitude amp = study_amplitude(cfg);
  const int m = cfg.m;
  const ContinuumKernel cont(amp, m);
  const MultiIndex zero(m);
  Table kt{"kernel", {"R", "z", "K", "K_R", "K_poisson", "lattice_minus_poisson"}, {}, {}};
  for (double R : cfg.R) {
    const LatticeKernel lat(study_spectrum(cfg, R));
    for (double z : cfg.z) {
      const Vec zv = z * axis(m);
      const double kr = lat.deriv(zv, zero);
      const double kp = kernel_poisson(amp, m, R, zv);
      kt.rows.push_back({R, z, cont.deriv(zv, zero), kr, kp, kr - kp});
    }
  }
  // Observed sup gap over a grid of R B, B = [-r0/2, r0/2]^m, against the bound.
  const double r0 = 0.9;
  const int ell = 2;
  const double p = m + 2.0;
  const int g = m == 1 ? 101 : (m == 2 ? 21 : 9);
  const auto alphas = multi_indices_up_to(m, ell);
  Table gt{"kernel_gap", {"R", "r0", "ell", "p", "observed_gap", "bound"}, {}, {}};
  for (double R : cfg.R) {
    const LatticeKernel lat(study_spectrum(cfg, R));
    std::size_t npts = 1;
    for (int i = 0; i < m; ++i) npts *= g;
    double gap = 0.0;
    for (std::size_t q = 0; q < npts; ++q) {
      Vec x(m);
      std::size_t rest = q;
      for (int i = m - 1; i >= 0; --i) {
        x[i] = R * r0 * (static_cast<double>(rest % g) / (g - 1) - 0.5);
        rest /= g;
      }
      for (const auto& a : alphas) gap = std::max(gap, std::fabs(lat.deriv(x, a) - cont.deriv(x, a)));
    }
    double bound = std::nan("");
    if (R > 2.0) {
      try {
        bound = kernel_gap_bound(amp, m, R, r0, ell, p);
      } catch (const Error& e) {
        rep.notes.push_back("gap bound at R=" + num(R) + ": " + e.what());
      }
    }
    gt.rows.push_back({R, r0, static_cast<double>(ell), p, gap, bound});
    rep.scalar("gap_R" + num(R), gap);
    rep.scalar("gap_bound_R" + num(R), bound);
  }
  rep.tables = {kt, gt};
  rep.scalar("K0", cont.deriv(Vec::Zero(m), zero));
  return rep;
}

Report cmd_kr_one(const ExperimentConfig& cfg) {
  Report rep;
  const Amplitude amp = study_amplitude(cfg);
  const Estimate C = continuum_C(cfg);
  Table t{"one_point", {"R", "rho_R", "rho_R_se", "rho_R_minus_C"}, {}, {}};
  for (std::size_t i = 0; i < cfg.R.size(); ++i) {
    const LatticeKernel lat(study_spectrum(cfg, cfg.R[i]));
    const Estimate e = one_point_density(lat, cfg.n_mc, sub_seed(cfg.seed, kTagOnePoint, i + 1));
    t.rows.push_back({cfg.R[i], e.value, e.std_error, e.value - C.value});
  }
  rep.tables = {t};
  rep.scalar("C_m", C.value);
  rep.scalar("C_m_se", C.std_error);
  if (cfg.m == 1) {
    // Rice: (1/pi) sqrt(lambda_4 / lambda_2) zeros of Phi' per unit length.
    const double l2 = amp.spectral_moment(MultiIndex(1, {2}));
    const double l4 = amp.spectral_moment(MultiIndex(1, {4}));
    rep.scalar("C_1_rice", std::sqrt(l4 / l2) / std::numbers::pi);
  }
  return rep;
}

Report cmd_kr_two(const ExperimentConfig& cfg) {
  Report rep;
  const ContinuumKernel kernel(study_amplitude(cfg), cfg.m);
  const Estimate C = continuum_C(cfg);
  Table t{"two_point",
          {"z", "rho_hat", "rho_hat_se", "rho_tilde", "rho_tilde_se", "delta", "delta_se", "rho_sq", "min_eig"},
          {},
          {}};
  std::vector<TwoPointReport> reps(cfg.z.size());
  parallel_for(reps.size(), [&](std::size_t i) {
    reps[i] = two_point_density(kernel, cfg.z[i] * axis(cfg.m), cfg.n_mc_pair, sub_seed(cfg.seed, kTagPair, i));
  });
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const auto& r = reps[i];
    t.rows.push_back({cfg.z[i], r.rho_hat.value, r.rho_hat.std_error, r.rho_tilde.value, r.rho_tilde.std_error,
                      r.delta.value, r.delta.std_error, C.value * C.value, r.min_eig});
  }
  rep.tables = {t};
  rep.scalar("C_m", C.value);
  rep.scalar("C_m_se", C.std_error);
  return rep;
}

Report cmd_kr_consts(const ExperimentConfig& cfg) {
  Report rep;
  const auto vc = V_m_const(study_amplitude(cfg), cfg.m, cfg.n_mc, cfg.n_mc_pair, cfg.quad_nodes,
                            sub_seed(cfg.seed, kTagConsts));
  Table t{"radial_nodes", {"r", "weight", "gauge", "rho_hat", "rho_hat_se", "delta", "delta_se"}, {}, {}};
  for (const auto& n : vc.detail.nodes)
    t.rows.push_back({n.r, n.weight, n.gauge ? 1.0 : 0.0, n.rho_hat.value, n.rho_hat.std_error, n.delta.value,
                      n.delta.std_error});
  rep.tables = {t};
  rep.scalar("C_m", vc.C.value);
  rep.scalar("C_m_se", vc.C.std_error);
  rep.scalar("Z_m", vc.Z.value);
  rep.scalar("Z_m_se", vc.Z.std_error);
  rep.scalar("V_m", vc.V.value);
  rep.scalar("V_m_se", vc.V.std_error);
  rep.scalar("r_max", vc.detail.r_max);
  rep.scalar("tail_bound", vc.detail.tail_bound);
  rep.scalar("correlation_length", vc.detail.corr_len);
  return rep;
}

Report cmd_ample(const ExperimentConfig& cfg) {
  Report rep;
  const auto scan =
      ampleness_scan(study_amplitude(cfg), cfg.m, cfg.R, cfg.jet_order, cfg.z_points, cfg.eps_trunc, cfg.modes);
  Table t{"ampleness",
          {"R", "jet_min_eig", "jet_threshold", "pair_min_eig", "pair_threshold", "pair_z_norm", "pass"},
          {},
          {}};
  std::vector<double> failed;
  for (const auto& row : scan.rows) {
    t.rows.push_back({row.R, row.jet.min_eigenvalue, row.jet.threshold, row.worst_pair.min_eigenvalue,
                      row.worst_pair.threshold, row.worst_pair.z.size() ? row.worst_pair.z.norm() : 0.0,
                      row.pass ? 1.0 : 0.0});
    if (!row.pass) failed.push_back(row.R);
  }
  rep.tables = {t};
  rep.scalar("empirical_R0", scan.empirical_R0);
  if (!failed.empty()) {
    rep.ok = false;
    rep.failure = "ampleness gate failed at R=";
    for (std::size_t i = 0; i < failed.size(); ++i) rep.failure += (i ? "," : "") + num(failed[i]);
  }
  return rep;
}

Table stats_tables(const StudyResult& res, int m, Table& trials) {
  Table t{"stats",
          {"R", "trials", "excluded", "mean", "mean_se", "var", "var_se_jackknife", "var_se_bootstrap", "mean_scaled",
           "mean_scaled_se", "var_scaled", "var_scaled_se"},
          {},
          {}};
  for (const auto& r : res.rows) {
    const double s = std::pow(r.R, -m);
    t.rows.push_back({r.R, static_cast<double>(r.trials), static_cast<double>(r.excluded), r.mean, r.mean_se, r.var,
                      r.var_se, r.var_se_boot, r.mean * s, r.mean_se * s, r.var * s, r.var_se * s});
  }
  trials = Table{"trials", {"R", "trial", "points", "Z_f", "euler", "morse", "newton_failures"}, {}, {}};
  for (const auto& tr : res.trials) {
    trials.seeds.push_back(tr.seed);
    trials.rows.push_back({tr.R, static_cast<double>(tr.trial), static_cast<double>(tr.points), tr.value,
                           static_cast<double>(tr.euler), tr.morse ? 1.0 : 0.0,
                           static_cast<double>(tr.newton_failures)});
  }
  return t;
}

Report cmd_stats(const ExperimentConfig& cfg) {
  Report rep;
  const StudyResult res = run_mc_stats(cfg);
  const Estimate C = continuum_C(cfg);
  Table trials;
  rep.tables = {stats_tables(res, cfg.m, trials), trials};
  rep.scalar("C_m", C.value);
  rep.scalar("C_m_se", C.std_error);
  rep.scalar("f_integral", res.f_int);
  rep.scalar("f_sq_integral", res.f_sq_int);
  for (const auto& r : res.rows) {
    const double s = std::pow(r.R, -cfg.m);
    const std::string k = "_R" + num(r.R);
    rep.scalar("mean_scaled" + k, r.mean * s);
    rep.scalar("mean_scaled_se" + k, r.mean_se * s);
    const double ref = C.value * res.f_int;
    const double se = std::hypot(r.mean_se * s, C.std_error * res.f_int);
    rep.scalar("mean_z_score" + k, se > 0.0 ? (r.mean * s - ref) / se : 0.0);
    rep.scalar("var_scaled" + k, r.var * s);
  }
  rep.notes = res.warnings;
  return rep;
}

Report cmd_scaling(const ExperimentConfig& cfg) {
  Report rep;
  const StudyResult res = run_mc_stats(cfg);
  std::vector<double> R, v, se;
  for (const auto& r : res.rows) {
    R.push_back(r.R);
    v.push_back(r.var);
    se.push_back(r.var_se);
  }
  const ScalingFit fit = scaling_fit(R, v, se, cfg.m);
  const auto vc = V_m_const(study_amplitude(cfg), cfg.m, cfg.n_mc, cfg.n_mc_pair, cfg.quad_nodes,
                            sub_seed(cfg.seed, kTagConsts));
  Table trials;
  rep.tables = {stats_tables(res, cfg.m, trials), trials};
  const double ref = std::log(vc.V.value * res.f_sq_int);
  rep.scalar("slope", fit.slope);
  rep.scalar("slope_se", fit.slope_se);
  rep.scalar("slope_ci_lo", fit.slope - 1.96 * fit.slope_se);
  rep.scalar("slope_ci_hi", fit.slope + 1.96 * fit.slope_se);
  rep.scalar("intercept", fit.intercept);
  rep.scalar("intercept_se", fit.intercept_se);
  rep.scalar("fixed_slope_intercept", fit.fixed_intercept);
  rep.scalar("fixed_slope_intercept_se", fit.fixed_intercept_se);
  rep.scalar("V_m", vc.V.value);
  rep.scalar("V_m_se", vc.V.std_error);
  rep.scalar("f_sq_integral", res.f_sq_int);
  rep.scalar("log_V_f_sq", ref);
  rep.notes = res.warnings;
  rep.notes.insert(rep.notes.end(), fit.warnings.begin(), fit.warnings.end());
  return rep;
}

Report cmd_lln(const ExperimentConfig& cfg) {
  Report rep;
  const LlnResult res = lln_trajectory(cfg);
  Table t{"lln", {"N", "p25", "p50", "p75", "iqr", "max_dev", "rel_max_dev", "reference"}, {}, {}};
  Table s{"lln_streams", {"stream", "N", "value"}, {}, {}};
  for (const auto& r : res.rows) {
    t.rows.push_back({r.N, r.p25, r.p50, r.p75, r.iqr, r.max_dev, r.rel_max_dev, res.reference});
    for (std::size_t k = 0; k < r.values.size(); ++k) {
      s.seeds.push_back(res.stream_seeds[k]);
      s.rows.push_back({static_cast<double>(k), r.N, r.values[k]});
    }
  }
  rep.tables = {t, s};
  rep.scalar("C_m", res.C.value);
  rep.scalar("C_m_se", res.C.std_error);
  rep.scalar("f_integral", res.f_int);
  rep.scalar("reference", res.reference);
  for (const auto& r : res.rows) rep.scalar("rel_max_dev_N" + num(r.N), r.rel_max_dev);
  if (res.l2_only) rep.notes.push_back("m = 1: L^2 convergence only; the almost-sure statement needs m >= 2");
  return rep;
}

Report cmd_blowup(const ExperimentConfig& cfg) {
  Report rep;
  const BlowupStudy st = blowup_bound_study(cfg);
  Table t{"blowup_w", {"r", "w", "w_se", "w_half_r", "w_half_r_se", "rho_tilde", "delta", "min_eig"}, {}, {}};
  double lo = INFINITY, hi = 0.0;
  for (std::size_t i = 0; i < st.w.size(); ++i) {
    const auto& a = st.w[i];
    const auto& b = st.w_refined[i];
    t.rows.push_back({a.r, a.w.value, a.w.std_error, b.w.value, b.w.std_error, a.rho_tilde.value, a.delta.value,
                      a.min_eig});
    lo = std::min(lo, std::fabs(a.w.value));
    hi = std::max(hi, std::fabs(a.w.value));
  }
  Table c{"cf_moments", {"p", "moment", "moment_se", "moment_half", "moment_half_se"}, {}, {}};
  for (std::size_t i = 0; i < st.p.size(); ++i)
    c.rows.push_back({static_cast<double>(st.p[i]), st.cf_moment[i].value, st.cf_moment[i].std_error,
                      st.cf_moment_half[i].value, st.cf_moment_half[i].std_error});
  rep.tables = {t, c};
  rep.scalar("w_max_over_min", lo > 0.0 ? hi / lo : INFINITY);
  rep.scalar("rho_hat_direct_r0.5", st.direct_half.value);
  rep.scalar("rho_hat_direct_r0.5_se", st.direct_half.std_error);
  rep.scalar("rho_hat_gauge_r0.5", st.gauge_half.value);
  rep.scalar("rho_hat_gauge_r0.5_se", st.gauge_half.std_error);
  rep.scalar("cf_R", st.cf_R);
  rep.scalar("K_observed", st.K_observed);
  return rep;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"sample", "crit",  "kernel",  "kr-one", "kr-two", "kr-consts",
                                                 "ample",  "stats", "scaling", "lln",    "blowup"};
  return names;
}

Report run_command(const std::string& command, const ExperimentConfig& cfg) {
  cfg.validate();
  Report rep;
  if (command == "sample")
    rep = cmd_sample(cfg);
  else if (command == "crit")
    rep = cmd_crit(cfg);
  else if (command == "kernel")
    rep = cmd_kernel(cfg);
  else if (command == "kr-one")
    rep = cmd_kr_one(cfg);
  else if (command == "kr-two")
    rep = cmd_kr_two(cfg);
  else if (command == "kr-consts")
    rep = cmd_kr_consts(cfg);
  else if (command == "ample")
    rep = cmd_ample(cfg);
  else if (command == "stats")
    rep = cmd_stats(cfg);
  else if (command == "scaling")
    rep = cmd_scaling(cfg);
  else if (command == "lln")
    rep = cmd_lln(cfg);
  else if (command == "blowup")
    rep = cmd_blowup(cfg);
  else
    throw Error(ErrorCode::invalid_argument, "unknown command '" + command + "'");
  rep.command = command;
  return rep;
}

}  // namespace critfield
