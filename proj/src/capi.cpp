#include "critfield/critfield.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "critfield/config.hpp"
#include "critfield/critical_finder.hpp"
#include "critfield/experiments.hpp"
#include "critfield/kac_rice.hpp"
#include "critfield/output.hpp"
#include "critfield/parallel.hpp"
#include "critfield/sampler.hpp"

using namespace critfield;

struct cf_config {
  ExperimentConfig cfg;
  std::string scratch;
};
struct cf_report {
  Report rep;
  std::string summary;
};
struct cf_amplitude {
  Amplitude amp;
};
struct cf_spectrum {
  LatticeSpectrum spec;
};
struct cf_field {
  FieldSample field;
};
struct cf_critset {
  CountingMeasure cm;
};

namespace {

thread_local std::string g_error;

cf_status fail(cf_status s, const std::string& msg) {
  g_error = msg;
  return s;
}

cf_status from_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_argument: return CF_E_INVALID_ARGUMENT;
    case ErrorCode::uncertified_tail: return CF_E_UNCERTIFIED_TAIL;
    case ErrorCode::quadrature: return CF_E_QUADRATURE;
    case ErrorCode::degenerate: return CF_E_DEGENERATE;
    case ErrorCode::not_psd: return CF_E_NOT_PSD;
    case ErrorCode::unsupported: return CF_E_UNSUPPORTED;
    case ErrorCode::resolution: return CF_E_RESOLUTION;
    case ErrorCode::io: return CF_E_IO;
    case ErrorCode::config: return CF_E_CONFIG;
    case ErrorCode::invariant: return CF_E_INVARIANT;
  }
  return CF_E_INTERNAL;
}

/// Runs body and converts exceptions into status codes.
template <class F>
cf_status guard(F&& body) {
  try {
    body();
    return CF_OK;
  } catch (const Error& e) {
    return fail(from_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CF_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CF_E_INTERNAL, e.what());
  } catch (...) {
    return fail(CF_E_INTERNAL, "unknown error");
  }
}

#define CF_REQUIRE(cond, what) \
  if (!(cond)) return fail(CF_E_INVALID_ARGUMENT, what)

Vec to_vec(const double* p, int m) {
  Vec v(m);
  for (int i = 0; i < m; ++i) v[i] = p[i];
  return v;
}

MultiIndex to_alpha(const int* a, int m) {
  MultiIndex alpha(m);
  if (a)
    for (int i = 0; i < m; ++i) alpha.set(i, a[i]);
  return alpha;
}

}  // namespace

extern "C" {

const char* cf_version(void) { return "0.1.0"; }

const char* cf_last_error(void) { return g_error.c_str(); }

const char* cf_status_name(cf_status s) {
  switch (s) {
    case CF_OK: return "ok";
    case CF_E_INVALID_ARGUMENT: return "invalid_argument";
    case CF_E_UNCERTIFIED_TAIL: return "uncertified_tail";
    case CF_E_QUADRATURE: return "quadrature";
    case CF_E_DEGENERATE: return "degenerate";
    case CF_E_NOT_PSD: return "not_psd";
    case CF_E_UNSUPPORTED: return "unsupported";
    case CF_E_RESOLUTION: return "resolution";
    case CF_E_IO: return "io";
    case CF_E_CONFIG: return "config";
    case CF_E_INVARIANT: return "invariant";
    case CF_E_INTERNAL: return "internal";
  }
  return "unknown";
}

cf_status cf_set_threads(int n) {
  CF_REQUIRE(n >= 0, "thread count must be >= 0");
  return guard([&] { set_max_threads(n); });
}

// ---- configuration ---------------------------------------------------------

cf_status cf_config_default(cf_config** out) {
  CF_REQUIRE(out, "null output pointer");
  return guard([&] { *out = new cf_config{}; });
}

cf_status cf_config_load(const char* path, cf_config** out) {
  CF_REQUIRE(path && out, "null argument");
  return guard([&] { *out = new cf_config{load_config(path), {}}; });
}

cf_status cf_config_parse(const char* text, cf_config** out) {
  CF_REQUIRE(text && out, "null argument");
  return guard([&] { *out = new cf_config{parse_config(text), {}}; });
}

cf_status cf_config_set(cf_config* cfg, const char* key, const char* value) {
  CF_REQUIRE(cfg && key && value, "null argument");
  return guard([&] {
    ExperimentConfig next = cfg->cfg;
    next.set(key, value);
    cfg->cfg = next;
  });
}

cf_status cf_config_get(cf_config* cfg, const char* key, const char** value) {
  CF_REQUIRE(cfg && key && value, "null argument");
  for (const auto& [k, v] : cfg->cfg.echo())
    if (k == key) {
      cfg->scratch = v;
      *value = cfg->scratch.c_str();
      return CF_OK;
    }
  return fail(CF_E_CONFIG, std::string("unknown key '") + key + "'");
}

cf_status cf_config_validate(const cf_config* cfg) {
  CF_REQUIRE(cfg, "null config");
  return guard([&] { cfg->cfg.validate(); });
}

cf_status cf_config_hash(const cf_config* cfg, char* buf, size_t len) {
  CF_REQUIRE(cfg && buf, "null argument");
  CF_REQUIRE(len >= 17, "hash buffer needs 17 bytes");
  return guard([&] {
    const std::string h = cfg->cfg.hash();
    std::memcpy(buf, h.c_str(), h.size() + 1);
  });
}

void cf_config_free(cf_config* cfg) { delete cfg; }

// ---- studies ---------------------------------------------------------------

cf_status cf_run_study(const char* command, const cf_config* cfg, cf_report** out) {
  CF_REQUIRE(command && cfg && out, "null argument");
  *out = nullptr;
  return guard([&] {
    auto* r = new cf_report{run_command(command, cfg->cfg), {}};
    r->summary = summarize(r->rep);
    *out = r;
  });
}

int cf_report_ok(const cf_report* rep) { return rep && rep->rep.ok ? 1 : 0; }

const char* cf_report_failure(const cf_report* rep) { return rep ? rep->rep.failure.c_str() : ""; }

const char* cf_report_summary(const cf_report* rep) { return rep ? rep->summary.c_str() : ""; }

size_t cf_report_scalar_count(const cf_report* rep) { return rep ? rep->rep.scalars.size() : 0; }

cf_status cf_report_scalar_at(const cf_report* rep, size_t i, const char** key, double* value) {
  CF_REQUIRE(rep && key && value, "null argument");
  CF_REQUIRE(i < rep->rep.scalars.size(), "scalar index out of range");
  *key = rep->rep.scalars[i].first.c_str();
  *value = rep->rep.scalars[i].second;
  return CF_OK;
}

cf_status cf_report_scalar(const cf_report* rep, const char* key, double* value) {
  CF_REQUIRE(rep && key && value, "null argument");
  for (const auto& [k, v] : rep->rep.scalars)
    if (k == key) {
      *value = v;
      return CF_OK;
    }
  return fail(CF_E_INVALID_ARGUMENT, std::string("no scalar '") + key + "' in report");
}

cf_status cf_write_outputs(const cf_report* rep, const cf_config* cfg, const char* dir) {
  CF_REQUIRE(rep && cfg && dir, "null argument");
  return guard([&] { write_report(rep->rep, cfg->cfg, dir); });
}

void cf_report_free(cf_report* rep) { delete rep; }

cf_status cf_verify_outputs(const char* dir) {
  CF_REQUIRE(dir, "null directory");
  std::vector<std::string> problems;
  const cf_status s = guard([&] { problems = verify_outputs(dir); });
  if (s != CF_OK) return s;
  if (problems.empty()) return CF_OK;
  std::string msg;
  for (const auto& p : problems) msg += (msg.empty() ? "" : "\n") + p;
  return fail(CF_E_INVARIANT, msg);
}

// ---- granular access -------------------------------------------------------

cf_status cf_amplitude_parse(const char* descriptor, cf_amplitude** out) {
  CF_REQUIRE(descriptor && out, "null argument");
  return guard([&] { *out = new cf_amplitude{Amplitude::parse(descriptor)}; });
}

cf_status cf_amplitude_eval(const cf_amplitude* amp, double x, double* value) {
  CF_REQUIRE(amp && value, "null argument");
  return guard([&] { *value = amp->amp(x); });
}

void cf_amplitude_free(cf_amplitude* amp) { delete amp; }

cf_status cf_kernel_continuum(const cf_amplitude* amp, int m, const double* z, const int* alpha, double* value) {
  CF_REQUIRE(amp && z && value, "null argument");
  return guard([&] { *value = kernel_deriv_continuum(amp->amp, m, to_vec(z, m), to_alpha(alpha, m)); });
}

cf_status cf_kernel_poisson(const cf_amplitude* amp, int m, double R, const double* z, double* value) {
  CF_REQUIRE(amp && z && value, "null argument");
  return guard([&] {
    check_dimension(m);
    *value = kernel_poisson(amp->amp, m, R, to_vec(z, m));
  });
}

cf_status cf_spectrum_build(const cf_amplitude* amp, int m, double R, double eps_trunc, cf_spectrum** out) {
  CF_REQUIRE(amp && out, "null argument");
  return guard([&] { *out = new cf_spectrum{LatticeSpectrum::build(amp->amp, m, R, eps_trunc)}; });
}

cf_status cf_spectrum_mode_count(const cf_spectrum* spec, size_t* count) {
  CF_REQUIRE(spec && count, "null argument");
  *count = spec->spec.modes().size();
  return CF_OK;
}

cf_status cf_kernel_lattice(const cf_spectrum* spec, const double* z, const int* alpha, double* value) {
  CF_REQUIRE(spec && z && value, "null argument");
  const int m = spec->spec.dim();
  return guard([&] { *value = kernel_deriv_lattice(spec->spec, to_vec(z, m), to_alpha(alpha, m)); });
}

void cf_spectrum_free(cf_spectrum* spec) { delete spec; }

cf_status cf_field_draw(const cf_spectrum* spec, uint64_t seed, cf_field** out) {
  CF_REQUIRE(spec && out, "null argument");
  return guard([&] { *out = new cf_field{FieldSample::draw(spec->spec, seed)}; });
}

cf_status cf_field_value(const cf_field* field, const double* theta, double* value) {
  CF_REQUIRE(field && theta && value, "null argument");
  return guard([&] { *value = field->field.value(to_vec(theta, field->field.dim())); });
}

void cf_field_free(cf_field* field) { delete field; }

cf_status cf_find_critical(const cf_field* field, int grid_n, cf_critset** out) {
  CF_REQUIRE(field && out, "null argument");
  CF_REQUIRE(grid_n >= 0, "grid_n must be >= 0");
  return guard([&] {
    FinderOptions opt;
    opt.grid_n = grid_n;
    *out = new cf_critset{find_critical_points(field->field, opt)};
  });
}

cf_status cf_critset_count(const cf_critset* set, size_t* count) {
  CF_REQUIRE(set && count, "null argument");
  *count = set->cm.size();
  return CF_OK;
}

cf_status cf_critset_point(const cf_critset* set, size_t i, double* theta, int* morse_index) {
  CF_REQUIRE(set && theta, "null argument");
  CF_REQUIRE(i < set->cm.size(), "point index out of range");
  const auto& p = set->cm.points()[i];
  for (int k = 0; k < p.theta.size(); ++k) theta[k] = p.theta[k];
  if (morse_index) *morse_index = p.morse_index;
  return CF_OK;
}

cf_status cf_critset_euler(const cf_critset* set, int* chi) {
  CF_REQUIRE(set && chi, "null argument");
  *chi = set->cm.euler_characteristic();
  return CF_OK;
}

void cf_critset_free(cf_critset* set) { delete set; }

cf_status cf_one_point_density(const cf_amplitude* amp, int m, long n_mc, uint64_t seed, double* value,
                               double* std_error) {
  CF_REQUIRE(amp && value, "null argument");
  return guard([&] {
    const ContinuumKernel k(amp->amp, m);
    const Estimate e = one_point_density(k, n_mc, seed);
    *value = e.value;
    if (std_error) *std_error = e.std_error;
  });
}

}  // extern "C"
