/* C interface to the eomech simulation library.
 *
 * Every fallible call returns an eom_status; on failure a description is
 * available from eom_last_error() on the same thread until the next call.
 * Handles are opaque and must be released with the matching *_free function.
 */
#ifndef EOMECH_H
#define EOMECH_H

#include <stddef.h>

#if defined(EOMECH_BUILDING_LIBRARY)
#define EOM_API __attribute__((visibility("default")))
#else
#define EOM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values 2..5 double as CLI exit codes. */
typedef enum {
  EOM_OK = 0,
  EOM_ERR_CONFIG = 2,
  EOM_ERR_NO_STABLE = 3,
  EOM_ERR_IO = 4,
  EOM_ERR_INTEGRATOR = 5,
  EOM_ERR_NUMERIC = 6,
  EOM_ERR_ARGUMENT = 7,
  EOM_ERR_INTERNAL = 8
} eom_status;

typedef struct eom_config eom_config;
typedef struct eom_analysis eom_analysis;
typedef struct eom_sweep eom_sweep;
typedef struct eom_series eom_series;

EOM_API const char* eom_version(void);

/* Message of the last failure on this thread ("" if none). */
EOM_API const char* eom_last_error(void);
/* Config key named by the last config error, "" otherwise. */
EOM_API const char* eom_last_error_field(void);
/* Time reached by the integrator when the last call failed with EOM_ERR_INTEGRATOR. */
EOM_API double eom_last_error_time(void);

/* Strings returned through char** out-parameters are released with this. */
EOM_API void eom_string_free(char* s);

/* ---- configuration ---------------------------------------------------- */

EOM_API eom_status eom_config_parse(const char* text, size_t len, eom_config** out);
EOM_API eom_status eom_config_load_file(const char* path, eom_config** out);
/* The built-in reference parameter set. */
EOM_API eom_status eom_config_fig2(eom_config** out);
EOM_API eom_status eom_config_clone(const eom_config* cfg, eom_config** out);
EOM_API void eom_config_free(eom_config* cfg);
/* Canonical JSON text of the config. */
EOM_API eom_status eom_config_to_json(const eom_config* cfg, char** out);
/* Set a sweepable parameter: delta0c, delta0w, kappa, g2_over_g1, temperature, power, power_w. */
EOM_API eom_status eom_config_set(eom_config* cfg, const char* param, double value);

typedef struct {
  double g1, g2, gw;
  double drive, drive_w;
  double n_c, n_w, n_m;
  double gamma_m, omega_m, kappa, kappa_w, delta0c, delta0w;
} eom_rates;

EOM_API eom_status eom_config_rates(const eom_config* cfg, eom_rates* out);

/* ---- single-point analysis -------------------------------------------- */

typedef struct {
  int label; /* 1-based rank by ascending intensity */
  int stable;
  int rh_stable;
  int degenerate;
  double Q, Q2, P2;
  double a_re, a_im, aw_re, aw_im;
  double I, Iw;
  double delta_c, delta_w;
  double omega_m_tilde, omega_m_prime, g_tilde;
  double residual, abscissa;
  double s[6]; /* Routh-Hurwitz quantities s1..s6 */
  int has_observables;
  double en_ow, en_om, en_mw;
  double n_eff, var_q, var_p, s_q, s_p;
  double physicality, lyapunov_residual;
  double lyapunov_floor; /* residual attainable with V stored in double */
} eom_branch;

EOM_API eom_status eom_analyze(const eom_config* cfg, eom_analysis** out);
EOM_API void eom_analysis_free(eom_analysis* a);
EOM_API eom_status eom_analysis_rates(const eom_analysis* a, eom_rates* out);
EOM_API size_t eom_analysis_branch_count(const eom_analysis* a);
EOM_API size_t eom_analysis_stable_count(const eom_analysis* a);
EOM_API eom_status eom_analysis_branch(const eom_analysis* a, size_t i, eom_branch* out);
/* Error text attached to branch i ("" if none). */
EOM_API const char* eom_analysis_branch_error(const eom_analysis* a, size_t i);
/* 6x6 matrices in row-major order. */
EOM_API eom_status eom_analysis_drift(const eom_analysis* a, size_t i, double out[36]);
EOM_API eom_status eom_analysis_covariance(const eom_analysis* a, size_t i, double out[36]);
EOM_API eom_status eom_analysis_diffusion(const eom_analysis* a, double out[36]);

/* ---- sweeps ----------------------------------------------------------- */

typedef struct {
  double coords[2];
  int n_coords;
  int branch, branch_count;
  int stable, rh_stable, has_observables;
  double abscissa, Q, I, Iw, delta_c, delta_w, omega_m_tilde;
  double en_ow, en_om, en_mw, n_eff, var_q, var_p, s_q, s_p, physicality;
  const char* error; /* valid only during the callback */
} eom_record;

/* Return nonzero to stop the sweep early. */
typedef int (*eom_record_cb)(const eom_record* rec, void* user);

EOM_API eom_status eom_sweep_create(const eom_config* base, eom_sweep** out);
/* base may be NULL (built-in parameters); g2_ratio may be NULL (preset default). */
EOM_API eom_status eom_sweep_from_preset(const char* id, const eom_config* base, const double* g2_ratio,
                                         eom_sweep** out);
EOM_API void eom_sweep_free(eom_sweep* s);
EOM_API eom_status eom_sweep_add_axis(eom_sweep* s, const char* param, const double* values, size_t n);
EOM_API eom_status eom_sweep_add_linear_axis(eom_sweep* s, const char* param, double lo, double hi, size_t n);
EOM_API eom_status eom_sweep_clear_axes(eom_sweep* s);
/* lowest-stable | all-stable | all | <branch number> */
EOM_API eom_status eom_sweep_set_policy(eom_sweep* s, const char* policy);
EOM_API eom_status eom_sweep_set_jobs(eom_sweep* s, int jobs);
EOM_API eom_status eom_sweep_set_g2_ratio(eom_sweep* s, double g2_over_g1);
/* Copy of the sweep's base config (preset deltas and g2 override applied). */
EOM_API eom_status eom_sweep_base_config(const eom_sweep* s, eom_config** out);
/* Replace the base config; axes, policy and jobs are kept. */
EOM_API eom_status eom_sweep_set_base_config(eom_sweep* s, const eom_config* cfg);
/* JSON description: base config, axes, policy (for run manifests). */
EOM_API eom_status eom_sweep_describe(const eom_sweep* s, char** out);
EOM_API eom_status eom_sweep_run(const eom_sweep* s, eom_record_cb cb, void* user);
/* format: "csv" or "json". */
EOM_API eom_status eom_sweep_write(const eom_sweep* s, const char* path, const char* format);

/* ---- critical temperature --------------------------------------------- */

/* pair: "ow", "om" or "mw". tc = 0 when there is no entanglement at t_lo. */
EOM_API eom_status eom_critical_temperature(const eom_config* cfg, const char* pair, double t_hi,
                                            double t_lo, double* tc, double* en_lo, double* en_hi);

/* ---- mean-field dynamics ---------------------------------------------- */

/* mode: "full" or "adiabatic"; init: "vacuum" or "adiabatic" (full mode only).
 * samples >= 2 evenly spaced points on [0, t_end]; t_end = 0 gives one row. */
EOM_API eom_status eom_dynamics(const eom_config* cfg, const char* mode, const char* init, double t_end,
                                size_t samples, double tol, eom_series** out);
EOM_API void eom_series_free(eom_series* s);
EOM_API size_t eom_series_rows(const eom_series* s);
EOM_API size_t eom_series_columns(const eom_series* s);
EOM_API const char* eom_series_column_name(const eom_series* s, size_t j);
EOM_API double eom_series_value(const eom_series* s, size_t row, size_t col);
EOM_API eom_status eom_series_write(const eom_series* s, const char* path, const char* format);

#ifdef __cplusplus
}
#endif

#endif /* EOMECH_H */
