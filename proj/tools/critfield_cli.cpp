// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "critfield/critfield.h"

namespace {

const std::vector<std::pair<std::string, std::string>> kCommands = {
    {"sample", "draw one field and write its values on a grid"},
    {"crit", "find the critical points of one field"},
    {"kernel", "covariance kernel: continuum, lattice, Poisson sum and gap bound"},
    {"kr-one", "one-point Kac-Rice density against Monte Carlo counts"},
    {"kr-two", "two-point density and its correlation over separations"},
    {"kr-consts", "mean and variance constants C_m, Z_m, V_m"},
    {"ample", "ampleness scan over study.R"},
    {"stats", "Monte Carlo mean and variance of Z_R(f) per R"},
    {"scaling", "stats plus the log-log variance fit"},
    {"lln", "law-of-large-numbers streams over study.N"},
    {"blowup", "two-point density near the diagonal"},
};

struct Options {
  std::string config;
  std::string out;
  long long seed = -1;
  int threads = 0;
  bool verify = false;
  std::vector<std::string> R;
  int m = 0;
  int trials = 0;
  double r0 = 0.0;
};

int report_error(cf_status s) {
  std::fprintf(stderr, "error (%s): %s\n", cf_status_name(s), cf_last_error());
  return static_cast<int>(s);
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

int run(const std::string& command, const Options& o) {
  cf_status s = cf_set_threads(o.threads);
  if (s != CF_OK) return report_error(s);

  cf_config* cfg = nullptr;
  s = o.config.empty() ? cf_config_default(&cfg) : cf_config_load(o.config.c_str(), &cfg);
  if (s != CF_OK) return report_error(s);

  std::vector<std::pair<std::string, std::string>> overrides;
  if (o.seed >= 0) overrides.emplace_back("study.seed", std::to_string(o.seed));
  if (!o.R.empty()) overrides.emplace_back("study.R", join(o.R));
  if (o.m > 0) overrides.emplace_back("field.m", std::to_string(o.m));
  if (o.trials > 0) overrides.emplace_back("study.trials", std::to_string(o.trials));
  if (o.r0 > 0.0) overrides.emplace_back("study.test_function", "bump(" + num(o.r0) + ")");
  if (!o.out.empty()) overrides.emplace_back("output.dir", o.out);
  for (const auto& [k, v] : overrides) {
    s = cf_config_set(cfg, k.c_str(), v.c_str());
    if (s != CF_OK) {
      cf_config_free(cfg);
      return report_error(s);
    }
  }
  s = cf_config_validate(cfg);
  if (s != CF_OK) {
    cf_config_free(cfg);
    return report_error(s);
  }

  cf_report* rep = nullptr;
  s = cf_run_study(command.c_str(), cfg, &rep);
  if (s != CF_OK) {
    cf_config_free(cfg);
    return report_error(s);
  }
  std::fputs(cf_report_summary(rep), stdout);

  const char* dir = nullptr;
  cf_config_get(cfg, "output.dir", &dir);
  const std::string out_dir = dir ? dir : "out";
  s = cf_write_outputs(rep, cfg, out_dir.c_str());
  char hash[17];
  cf_config_hash(cfg, hash, sizeof hash);
  const bool ok = cf_report_ok(rep);
  const std::string failure = cf_report_failure(rep);
  cf_report_free(rep);
  cf_config_free(cfg);
  if (s != CF_OK) return report_error(s);
  std::printf("  outputs: %s (config_hash=%s)\n", out_dir.c_str(), hash);

  if (o.verify) {
    s = cf_verify_outputs(out_dir.c_str());
    if (s != CF_OK) return report_error(s);
    std::printf("  verify: ok\n");
  }
  if (!ok) {
    std::fprintf(stderr, "error (invariant): %s\n", failure.c_str());
    return static_cast<int>(CF_E_INVARIANT);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critfield: critical points of random Gaussian fields on flat tori"};
  app.require_subcommand(1);
  Options o;
  std::string command;

  for (const auto& [name, help] : kCommands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "configuration file");
    sub->add_option("--seed", o.seed, "master seed (overrides study.seed)");
    sub->add_option("--threads", o.threads, "worker threads (default: all cores)");
    sub->add_option("--out", o.out, "output directory (overrides output.dir)");
    sub->add_flag("--verify", o.verify, "re-check the written files against the manifest");
    sub->add_option("--R", o.R, "scale list (overrides study.R)")->delimiter(',');
    sub->add_option("--m", o.m, "dimension (overrides field.m)");
    sub->add_option("--trials", o.trials, "trials per R (overrides study.trials)");
    sub->add_option("--r0", o.r0, "use the bump test function with this radius");
    sub->callback([&command, n = name] { command = n; });
  }
  std::string verify_dir;
  auto* verify = app.add_subcommand("verify", "re-check the hashes of an output directory");
  verify->add_option("dir", verify_dir, "output directory")->required();
  verify->callback([&command] { command = "verify"; });

  CLI11_PARSE(app, argc, argv);

  if (command == "verify") {
    const cf_status s = cf_verify_outputs(verify_dir.c_str());
    if (s != CF_OK) return report_error(s);
    std::printf("verify: ok\n");
    return 0;
  }
  return run(command, o);
}
