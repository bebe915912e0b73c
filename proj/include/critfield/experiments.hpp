#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "critfield/config.hpp"
#include "critfield/covariance.hpp"
#include "critfield/critical_finder.hpp"
#include "critfield/kac_rice.hpp"
#include "critfield/output.hpp"

namespace critfield {

/// Seed of one trial: a 64-bit mixing hash of (master, R, trial, stream).
std::uint64_t trial_seed(std::uint64_t master, double R, int trial, int stream);

/// Lattice spectrum for a study at scale R, honouring field.modes.
LatticeSpectrum study_spectrum(const ExperimentConfig& cfg, double R);
FinderOptions finder_options(const ExperimentConfig& cfg);

/// Jet and pair ampleness of the study spectrum at R. Throws
/// ErrorCode::invariant with "ampleness gate failed at R=..." otherwise.
void ampleness_gate(const ExperimentConfig& cfg, double R);

struct TrialRecord {
  double R = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  long points = 0;
  double value = 0.0;  ///< Z_R(f)
  int euler = 0;
  bool morse = true;
  long newton_failures = 0;
};

struct StatsRow {
  double R = 0.0;
  long trials = 0;    ///< Morse trials used
  long excluded = 0;  ///< non-Morse trials dropped
  double mean = 0.0, mean_se = 0.0;
  double var = 0.0;
  double var_se = 0.0;       ///< delete-1 jackknife
  double var_se_boot = 0.0;  ///< nonparametric bootstrap, for cross-checking
};

struct StudyResult {
  int m = 1;
  double f_int = 0.0, f_sq_int = 0.0;
  std::vector<StatsRow> rows;
  std::vector<TrialRecord> trials;  ///< in (R, trial) order
  std::vector<std::string> warnings;
};

/// Samples `trials` fields per R, counts critical points and evaluates Z_R(f).
/// Fails with ErrorCode::invariant when more than 1% of the trials at some R
/// are not Morse.
StudyResult run_mc_stats(const ExperimentConfig& cfg);

/// Sample variance (n - 1 denominator).
double sample_variance(const std::vector<double>& x);
/// Delete-1 jackknife standard error of the sample variance.
double jackknife_variance_se(const std::vector<double>& x);
/// Bootstrap standard error of the sample variance from B resamples.
double bootstrap_variance_se(const std::vector<double>& x, int B, std::uint64_t seed);

struct ScalingFit {
  double slope = 0.0, slope_se = 0.0;
  double intercept = 0.0, intercept_se = 0.0;
  /// Intercept with the slope held at the predicted exponent.
  double fixed_slope = 0.0;
  double fixed_intercept = 0.0, fixed_intercept_se = 0.0;
  std::vector<double> R_used;
  std::vector<std::string> warnings;
};

/// Least squares of log var against log R. Standard errors propagate the
/// per-R jackknife errors through the delta method. Rows with nonpositive
/// variance are dropped with a warning; fewer than 3 distinct R is an error.
ScalingFit scaling_fit(const std::vector<double>& R, const std::vector<double>& var,
                       const std::vector<double>& var_se, double fixed_slope);

struct LlnRow {
  double N = 0.0;
  std::vector<double> values;  ///< N^{-m} Z_N(f) per stream
  double p25 = 0.0, p50 = 0.0, p75 = 0.0, iqr = 0.0;
  double max_dev = 0.0;      ///< max over streams of |value - reference|
  double rel_max_dev = 0.0;  ///< max_dev / |reference|
};

struct LlnResult {
  int m = 1;
  bool l2_only = false;  ///< m = 1: only the L^2 statement applies
  Estimate C;            ///< C_m from the one-point density
  double f_int = 0.0;
  double reference = 0.0;  ///< C_m \int f
  std::vector<LlnRow> rows;
  std::vector<std::uint64_t> stream_seeds;
};

/// One field stream per seed, evaluated at every N of the list (the same
/// seed across N).
LlnResult lln_trajectory(const ExperimentConfig& cfg);

struct BlowupStudy {
  int m = 1;
  std::vector<BlowUpReport> w;          ///< over the r grid
  std::vector<BlowUpReport> w_refined;  ///< at r / 2
  Estimate direct_half;                 ///< rho_hat(0.5 nu) without the gauge change
  Estimate gauge_half;                  ///< the same through the gauge change
  double cf_R = 0.0;
  std::vector<int> p = {1, 2, 4};
  std::vector<Estimate> cf_moment;       ///< E[C_F^p] over all trials
  std::vector<Estimate> cf_moment_half;  ///< over the first half of the trials
  double K_observed = 0.0;               ///< sup w / E[C_F]
};

/// Blow-up density table and Monte Carlo moments of
/// C_F = sup_B |grad Phi| + |D^2 Phi| + |D^3 Phi| over a grid of the unit box.
BlowupStudy blowup_bound_study(const ExperimentConfig& cfg);

/// Runs one CLI command: sample, crit, kernel, kr-one, kr-two, kr-consts,
/// ample, stats, scaling, lln or blowup.
Report run_command(const std::string& command, const ExperimentConfig& cfg);

const std::vector<std::string>& command_names();

}  // namespace critfield
