#include <doctest.h>

#include <cmath>
#include <random>

#include "critfield/experiments.hpp"
#include "critfield/parallel.hpp"

using namespace critfield;

namespace {

std::string render_all(const Report& rep, const ExperimentConfig& cfg) {
  std::string s;
  for (const auto& t : rep.tables) s += render_csv(t, rep.command, cfg.hash());
  for (const auto& [k, v] : rep.scalars) s += k + "=" + std::to_string(v) + "\n";
  return s;
}

}  // namespace

TEST_CASE("trial seeds") {
  CHECK(trial_seed(1, 8.0, 0, 0) == trial_seed(1, 8.0, 0, 0));
  CHECK(trial_seed(1, 8.0, 0, 0) != trial_seed(1, 8.0, 1, 0));
  CHECK(trial_seed(1, 8.0, 0, 0) != trial_seed(1, 16.0, 0, 0));
  CHECK(trial_seed(1, 8.0, 0, 0) != trial_seed(2, 8.0, 0, 0));
  CHECK(trial_seed(1, 8.0, 0, 0) != trial_seed(1, 8.0, 0, 1));
}

TEST_CASE("variance and its standard errors") {
  CHECK(sample_variance({1.0, 2.0, 3.0, 4.0}) == doctest::Approx(5.0 / 3.0));
  std::mt19937_64 gen(8);
  std::normal_distribution<double> nd;
  std::vector<double> x(4000);
  for (double& v : x) v = 2.0 * nd(gen);
  const double var = sample_variance(x);
  CHECK(var == doctest::Approx(4.0).epsilon(0.1));
  const double jk = jackknife_variance_se(x);
  const double bs = bootstrap_variance_se(x, 200, 3);
  // Normal data: se(s^2) = sigma^2 sqrt(2 / (n - 1)).
  const double theory = 4.0 * std::sqrt(2.0 / 3999.0);
  CHECK(jk == doctest::Approx(theory).epsilon(0.15));
  CHECK(bs == doctest::Approx(jk).epsilon(0.25));
  CHECK(bootstrap_variance_se(x, 200, 3) == bs);

  // Jackknife by brute force on a small sample.
  const std::vector<double> y = {0.3, -1.2, 2.5, 0.7, 1.1, -0.4};
  double mean = 0.0;
  std::vector<double> loo;
  for (std::size_t i = 0; i < y.size(); ++i) {
    std::vector<double> z;
    for (std::size_t j = 0; j < y.size(); ++j)
      if (j != i) z.push_back(y[j]);
    loo.push_back(sample_variance(z));
    mean += loo.back() / y.size();
  }
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  const double n = static_cast<double>(y.size());
  CHECK(jackknife_variance_se(y) == doctest::Approx(std::sqrt((n - 1) / n * ss)).epsilon(1e-12));
}

TEST_CASE("scaling fit on exact power laws") {
  const std::vector<double> R = {8, 16, 32, 64};
  std::vector<double> v, se;
  for (double r : R) {
    v.push_back(3.0 * std::pow(r, 1.5));
    se.push_back(0.01 * v.back());
  }
  const auto fit = scaling_fit(R, v, se, 1.5);
  CHECK(fit.slope == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(fit.fixed_intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(fit.slope_se > 0.0);
  CHECK(fit.intercept_se > 0.0);

  std::vector<double> v2 = v;
  v2[0] = 0.0;
  const auto dropped = scaling_fit(R, v2, se, 1.0);
  CHECK(dropped.R_used.size() == 3);
  CHECK_FALSE(dropped.warnings.empty());
  v2[1] = -1.0;
  CHECK_THROWS_AS(scaling_fit(R, v2, se, 1.0), Error);
}

TEST_CASE("Monte Carlo statistics") {
  ExperimentConfig cfg;
  cfg.R = {8, 12};
  cfg.trials = 40;
  const auto res = run_mc_stats(cfg);
  REQUIRE(res.rows.size() == 2);
  CHECK(res.trials.size() == 80);
  for (const auto& t : res.trials) {
    CHECK(t.points % 2 == 0);
    CHECK(t.value == static_cast<double>(t.points));
  }
  CHECK(res.rows[0].trials + res.rows[0].excluded == 40);

  cfg.test_function = "zero";
  const auto zero = run_mc_stats(cfg);
  for (const auto& r : zero.rows) {
    CHECK(r.mean == 0.0);
    CHECK(r.var == 0.0);
  }
}

TEST_CASE("ampleness gate") {
  ExperimentConfig cfg;
  cfg.R = {2};
  cfg.modes = 1;
  try {
    ampleness_gate(cfg, 2.0);
    FAIL("expected the gate to fail");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invariant);
    CHECK(std::string(e.what()).find("ampleness gate failed at R=2") != std::string::npos);
  }
  cfg.modes = -1;
  CHECK_NOTHROW(ampleness_gate(cfg, 8.0));

  cfg.modes = 1;
  const Report rep = run_command("ample", cfg);
  CHECK_FALSE(rep.ok);
  CHECK(rep.failure.find("ampleness gate failed") != std::string::npos);
  CHECK_THROWS_AS(run_command("stats", cfg), Error);
}

TEST_CASE("commands are independent of the thread count") {
  ExperimentConfig cfg;
  cfg.R = {8};
  cfg.trials = 30;
  cfg.n_mc = 20000;
  cfg.n_mc_pair = 5000;
  cfg.z = {0.5, 2};
  for (const std::string cmd : {"crit", "stats", "kr-two"}) {
    set_max_threads(1);
    const std::string one = render_all(run_command(cmd, cfg), cfg);
    set_max_threads(4);
    const std::string four = render_all(run_command(cmd, cfg), cfg);
    CHECK_MESSAGE(one == four, cmd);
  }
  set_max_threads(0);
  CHECK_THROWS_AS(run_command("nonsense", cfg), Error);
  CHECK(command_names().size() == 11);
}

TEST_CASE("crit agrees with the first stats trial") {
  ExperimentConfig cfg;
  cfg.R = {8};
  cfg.trials = 3;
  const Report crit = run_command("crit", cfg);
  const auto res = run_mc_stats(cfg);
  CHECK(crit.get("critical_points") == static_cast<double>(res.trials[0].points));
  CHECK(crit.get("sign_change_count") == crit.get("critical_points"));
}
