/* C interface to libcritfield.
 *
 * Every function returns a cf_status. On failure the message is available
 * from cf_last_error() on the calling thread until the next failing call.
 * Handles are opaque and owned by the caller; release them with the matching
 * *_free function (NULL is accepted). Strings returned as const char* are
 * owned by the handle they came from. */
#ifndef CRITFIELD_H
#define CRITFIELD_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CF_API __declspec(dllexport)
#else
#define CF_API __attribute__((visibility("default")))
#endif

typedef enum cf_status {
  CF_OK = 0,
  CF_E_INVALID_ARGUMENT = 1,
  CF_E_UNCERTIFIED_TAIL = 2,
  CF_E_QUADRATURE = 3,
  CF_E_DEGENERATE = 4,
  CF_E_NOT_PSD = 5,
  CF_E_UNSUPPORTED = 6,
  CF_E_RESOLUTION = 7,
  CF_E_IO = 8,
  CF_E_CONFIG = 9,
  CF_E_INVARIANT = 10,
  CF_E_INTERNAL = 100
} cf_status;

typedef struct cf_config cf_config;
typedef struct cf_report cf_report;
typedef struct cf_amplitude cf_amplitude;
typedef struct cf_spectrum cf_spectrum;
typedef struct cf_field cf_field;
typedef struct cf_critset cf_critset;

CF_API const char* cf_version(void);
CF_API const char* cf_last_error(void);
CF_API const char* cf_status_name(cf_status s);
/* Caps worker threads; 0 restores the default. Results do not depend on it. */
CF_API cf_status cf_set_threads(int n);

/* ---- configuration ---------------------------------------------------- */
CF_API cf_status cf_config_default(cf_config** out);
CF_API cf_status cf_config_load(const char* path, cf_config** out);
CF_API cf_status cf_config_parse(const char* text, cf_config** out);
/* key is "section.key", value as it would appear in a file. */
CF_API cf_status cf_config_set(cf_config* cfg, const char* key, const char* value);
/* Canonical value of a key; the pointer stays valid until the next call on cfg. */
CF_API cf_status cf_config_get(cf_config* cfg, const char* key, const char** value);
CF_API cf_status cf_config_validate(const cf_config* cfg);
/* 16 hex digits plus the terminator: buf must hold at least 17 bytes. */
CF_API cf_status cf_config_hash(const cf_config* cfg, char* buf, size_t len);
CF_API void cf_config_free(cf_config* cfg);

/* ---- studies ---------------------------------------------------------- */
/* command: sample, crit, kernel, kr-one, kr-two, kr-consts, ample, stats,
 * scaling, lln or blowup. A study whose run-level check fails still returns
 * CF_OK with cf_report_ok() == 0. */
CF_API cf_status cf_run_study(const char* command, const cf_config* cfg, cf_report** out);
CF_API int cf_report_ok(const cf_report* rep);
CF_API const char* cf_report_failure(const cf_report* rep);
CF_API const char* cf_report_summary(const cf_report* rep);
CF_API size_t cf_report_scalar_count(const cf_report* rep);
CF_API cf_status cf_report_scalar_at(const cf_report* rep, size_t i, const char** key, double* value);
CF_API cf_status cf_report_scalar(const cf_report* rep, const char* key, double* value);
/* CSV files plus manifest.json under dir. */
CF_API cf_status cf_write_outputs(const cf_report* rep, const cf_config* cfg, const char* dir);
CF_API void cf_report_free(cf_report* rep);
/* CF_OK when every file listed in dir/manifest.json matches its hash;
 * CF_E_INVARIANT otherwise, with the problems in cf_last_error(). */
CF_API cf_status cf_verify_outputs(const char* dir);

/* ---- granular access --------------------------------------------------- */
CF_API cf_status cf_amplitude_parse(const char* descriptor, cf_amplitude** out);
CF_API cf_status cf_amplitude_eval(const cf_amplitude* amp, double x, double* value);
CF_API void cf_amplitude_free(cf_amplitude* amp);

/* z has m entries; alpha has m entries or is NULL for the kernel itself. */
CF_API cf_status cf_kernel_continuum(const cf_amplitude* amp, int m, const double* z, const int* alpha,
                                     double* value);
CF_API cf_status cf_kernel_poisson(const cf_amplitude* amp, int m, double R, const double* z, double* value);

CF_API cf_status cf_spectrum_build(const cf_amplitude* amp, int m, double R, double eps_trunc, cf_spectrum** out);
CF_API cf_status cf_spectrum_mode_count(const cf_spectrum* spec, size_t* count);
CF_API cf_status cf_kernel_lattice(const cf_spectrum* spec, const double* z, const int* alpha, double* value);
CF_API void cf_spectrum_free(cf_spectrum* spec);

CF_API cf_status cf_field_draw(const cf_spectrum* spec, uint64_t seed, cf_field** out);
CF_API cf_status cf_field_value(const cf_field* field, const double* theta, double* value);
CF_API void cf_field_free(cf_field* field);

/* grid_n = 0 selects the grid automatically. */
CF_API cf_status cf_find_critical(const cf_field* field, int grid_n, cf_critset** out);
CF_API cf_status cf_critset_count(const cf_critset* set, size_t* count);
/* theta receives m coordinates. */
CF_API cf_status cf_critset_point(const cf_critset* set, size_t i, double* theta, int* morse_index);
CF_API cf_status cf_critset_euler(const cf_critset* set, int* chi);
CF_API void cf_critset_free(cf_critset* set);

/* Mean density of critical points per unit volume of the continuum field. */
CF_API cf_status cf_one_point_density(const cf_amplitude* amp, int m, long n_mc, uint64_t seed, double* value,
                                      double* std_error);

#ifdef __cplusplus
}
#endif

#endif /* CRITFIELD_H */
