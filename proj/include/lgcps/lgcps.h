/* C interface to the lgcps library.
 *
 * Every function that can fail returns an lgcps_status; on failure a message
 * is available from lgcps_last_error() on the calling thread until the next
 * failing call. Objects are opaque handles created by *_create / *_run /
 * *_read functions and released with the matching *_free function. Strings
 * returned through char** must be released with lgcps_string_free.
 */
#ifndef LGCPS_H
#define LGCPS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LGCPS_BUILDING_LIBRARY)
#    define LGCPS_API __declspec(dllexport)
#  else
#    define LGCPS_API __declspec(dllimport)
#  endif
#else
#  define LGCPS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  LGCPS_OK = 0,
  LGCPS_ERR_INVALID_ARGUMENT = 1,
  LGCPS_ERR_IO = 2,
  LGCPS_ERR_NUMERICAL = 3,
  LGCPS_ERR_SCREEN_FAILURE = 4,
  LGCPS_ERR_BUDGET_EXHAUSTED = 5,
  LGCPS_ERR_INTERNAL = 6
} lgcps_status;

typedef enum {
  LGCPS_MODEL_LGCP_STRAUSS = 0,
  LGCPS_MODEL_LGCP = 1,
  LGCPS_MODEL_STRAUSS = 2
} lgcps_model;

typedef enum {
  LGCPS_CURVE_K = 0,
  LGCPS_CURVE_L = 1,
  LGCPS_CURVE_F = 2,
  LGCPS_CURVE_G = 3,
  LGCPS_CURVE_J = 4
} lgcps_curve_kind;

typedef struct {
  double mu;
  double sigma2;
  double s;
  double gamma;
  double R;
} lgcps_params;

typedef struct {
  double xmin;
  double xmax;
  double ymin;
  double ymax;
} lgcps_window;

typedef struct {
  int nx;
  int ny;
  uint64_t burnin;
} lgcps_sim_options;

#define LGCPS_MAX_QUADRAT_ORDERS 16

typedef struct {
  int n_r;
  double r_fraction;
  int n_quadrat_orders;
  int quadrat_orders[LGCPS_MAX_QUADRAT_ORDERS];
  /* > 0: separate range (0, extreme_r_max] for L_max, L_min, L_argmin. */
  double extreme_r_max;
  int extreme_n_r;
} lgcps_summary_options;

typedef struct {
  lgcps_model model;
  lgcps_sim_options simulation;
  lgcps_summary_options summary;
  size_t k_pilot;
  size_t k_abc;
  size_t m;
  double quantile;
  size_t budget_factor;
  int cv_folds;
  int n_lambda;
  double lambda_min_ratio;
  int workers;
} lgcps_abc_config;

typedef struct {
  size_t n;
  size_t m;
  int n_trees;
  int workers;
  lgcps_sim_options simulation;
  lgcps_summary_options summary;
} lgcps_choice_config;

typedef struct {
  lgcps_model selected;
  double vote_fractions[3]; /* indexed by lgcps_model */
  double posterior_probability;
  double oob_error;
  int tie;
  size_t n_excluded;
} lgcps_choice;

typedef struct lgcps_pattern lgcps_pattern;
typedef struct lgcps_prior lgcps_prior;
typedef struct lgcps_pilot lgcps_pilot;
typedef struct lgcps_posterior lgcps_posterior;
typedef struct lgcps_envelope lgcps_envelope;
typedef struct lgcps_reference_table lgcps_reference_table;
typedef struct lgcps_forest lgcps_forest;

LGCPS_API const char* lgcps_version(void);
LGCPS_API const char* lgcps_last_error(void);
LGCPS_API void lgcps_string_free(char* s);
LGCPS_API const char* lgcps_model_name(lgcps_model model);
LGCPS_API lgcps_status lgcps_model_from_name(const char* name, lgcps_model* out);
/* Seed for task `index` of stream `stream` under master seed `master`. */
LGCPS_API uint64_t lgcps_derive_seed(uint64_t master, uint64_t stream, uint64_t index);

/* Point patterns. xy holds x0, y0, x1, y1, ... */
LGCPS_API lgcps_status lgcps_pattern_create(lgcps_window window, const double* xy, size_t n,
                                            lgcps_pattern** out);
LGCPS_API lgcps_status lgcps_pattern_read_csv(const char* path, lgcps_pattern** out);
LGCPS_API lgcps_status lgcps_pattern_write_csv(const lgcps_pattern* pattern, const char* path);
LGCPS_API void lgcps_pattern_free(lgcps_pattern* pattern);
LGCPS_API size_t lgcps_pattern_size(const lgcps_pattern* pattern);
LGCPS_API lgcps_window lgcps_pattern_window(const lgcps_pattern* pattern);
LGCPS_API lgcps_status lgcps_pattern_points(const lgcps_pattern* pattern, double* xy);
LGCPS_API lgcps_status lgcps_close_pair_count(const lgcps_pattern* pattern, double R,
                                              size_t* out);

/* Priors. Presets: "P1", "P2", "P3", "oak". */
LGCPS_API lgcps_status lgcps_prior_preset(const char* name, lgcps_prior** out);
LGCPS_API lgcps_status lgcps_prior_from_json(const char* json, lgcps_prior** out);
LGCPS_API lgcps_status lgcps_prior_to_json(const lgcps_prior* prior, char** out);
LGCPS_API lgcps_status lgcps_prior_sample(const lgcps_prior* prior, uint64_t seed,
                                          lgcps_params* out);
LGCPS_API void lgcps_prior_free(lgcps_prior* prior);

/* Simulation. */
LGCPS_API lgcps_sim_options lgcps_sim_options_default(void);
LGCPS_API lgcps_status lgcps_simulate(lgcps_model model, const lgcps_params* theta,
                                      lgcps_window window, const lgcps_sim_options* options,
                                      uint64_t seed, lgcps_pattern** out);
/* The field realization behind lgcps_simulate for the same inputs. */
LGCPS_API lgcps_status lgcps_write_field_csv(const lgcps_params* theta, lgcps_window window,
                                             const lgcps_sim_options* options, uint64_t seed,
                                             const char* path);
/* Two chains on one field (empty start and Poisson start); CSV columns
 * iter,n,sR,init_label. */
LGCPS_API lgcps_status lgcps_trace_csv(const lgcps_params* theta, lgcps_window window,
                                       const lgcps_sim_options* options, uint64_t n_iters,
                                       uint64_t seed, const char* path);

/* Summary statistics. */
LGCPS_API lgcps_summary_options lgcps_summary_options_default(void);
LGCPS_API lgcps_status lgcps_summary_dimension(const lgcps_summary_options* options, size_t* out);
LGCPS_API lgcps_status lgcps_summary_name(const lgcps_summary_options* options, size_t index,
                                          char** out);
LGCPS_API lgcps_status lgcps_summary_vector(const lgcps_pattern* pattern,
                                            const lgcps_summary_options* options, double* out,
                                            size_t capacity, int* finite);
/* Default grid: 0.2 h for K, L, F, G; the J default range for J. */
LGCPS_API lgcps_status lgcps_default_r_grid(const lgcps_pattern* pattern, lgcps_curve_kind kind,
                                            size_t n_r, double* r_out);
LGCPS_API lgcps_status lgcps_curve(const lgcps_pattern* pattern, lgcps_curve_kind kind,
                                   const double* r, size_t n_r, double* values, int* defined);

/* ABC. */
LGCPS_API lgcps_abc_config lgcps_abc_config_default(void);
LGCPS_API lgcps_status lgcps_pilot_run(const lgcps_prior* prior, lgcps_window window,
                                       const lgcps_abc_config* config, uint64_t seed,
                                       lgcps_pilot** out);
LGCPS_API lgcps_status lgcps_pilot_write_csv(const lgcps_pilot* pilot, const char* path);
LGCPS_API lgcps_status lgcps_pilot_read_csv(const char* path, lgcps_pilot** out);
LGCPS_API size_t lgcps_pilot_size(const lgcps_pilot* pilot);
LGCPS_API void lgcps_pilot_counts(const lgcps_pilot* pilot, size_t* n_excluded,
                                  size_t* n_screen_failures, size_t* n_simulations);
LGCPS_API void lgcps_pilot_free(lgcps_pilot* pilot);

/* Runs the pilot stage unless `pilot` is given, then projections, tolerance
 * and rejection sampling. A shortfall is reported as
 * LGCPS_ERR_BUDGET_EXHAUSTED with the partial posterior still returned. */
LGCPS_API lgcps_status lgcps_abc_fit(const lgcps_pattern* observed, const lgcps_prior* prior,
                                     const lgcps_pilot* pilot, const lgcps_abc_config* config,
                                     uint64_t seed, lgcps_posterior** out);
LGCPS_API size_t lgcps_posterior_size(const lgcps_posterior* posterior);
LGCPS_API lgcps_status lgcps_posterior_draw(const lgcps_posterior* posterior, size_t i,
                                            lgcps_params* out);
LGCPS_API double lgcps_posterior_epsilon(const lgcps_posterior* posterior);
LGCPS_API size_t lgcps_posterior_attempts(const lgcps_posterior* posterior);
LGCPS_API int lgcps_posterior_shortfall(const lgcps_posterior* posterior);
LGCPS_API lgcps_status lgcps_posterior_write_csv(const lgcps_posterior* posterior,
                                                 const char* path);
LGCPS_API lgcps_status lgcps_posterior_read_csv(const char* path, lgcps_posterior** out);
/* JSON: tolerance, counters, marginal summaries and, when available, the
 * projection models with standardized coefficients by summary name. */
LGCPS_API lgcps_status lgcps_posterior_report_json(const lgcps_posterior* posterior, char** out);
/* CSV with columns param,x,density; point-mass marginals are omitted. */
LGCPS_API lgcps_status lgcps_posterior_kde_csv(const lgcps_posterior* posterior, const char* path);
LGCPS_API void lgcps_posterior_free(lgcps_posterior* posterior);

/* Posterior predictive combined L and J envelope test. n_sims = 0 uses one
 * simulation per posterior draw. */
LGCPS_API lgcps_status lgcps_envelope_run(const lgcps_pattern* observed,
                                          const lgcps_posterior* posterior, lgcps_model model,
                                          const lgcps_sim_options* options, size_t n_sims,
                                          double level, int workers, uint64_t seed,
                                          lgcps_envelope** out);
LGCPS_API double lgcps_envelope_p_value(const lgcps_envelope* envelope);
LGCPS_API int lgcps_envelope_rejected(const lgcps_envelope* envelope);
LGCPS_API size_t lgcps_envelope_excluded(const lgcps_envelope* envelope);
LGCPS_API size_t lgcps_envelope_simulations(const lgcps_envelope* envelope);
/* which: 0 = L, 1 = J. */
LGCPS_API double lgcps_envelope_set_p_value(const lgcps_envelope* envelope, int which);
/* CSV columns r,lo,hi,data,mean,defined. */
LGCPS_API lgcps_status lgcps_envelope_write_csv(const lgcps_envelope* envelope, int which,
                                                const char* path);
LGCPS_API void lgcps_envelope_free(lgcps_envelope* envelope);

/* Global envelope test on raw curves: row-major (s + 1) x n_r array, row 0
 * the observed curve. lower/upper may be NULL. */
LGCPS_API lgcps_status lgcps_global_envelope_test(const double* curves, size_t s, size_t n_r,
                                                  double level, double* p_value, int* rejected,
                                                  double* lower, double* upper);

/* Model choice. */
LGCPS_API lgcps_choice_config lgcps_choice_config_default(void);
LGCPS_API lgcps_status lgcps_reference_table_build(const lgcps_prior* prior, lgcps_window window,
                                                   const lgcps_choice_config* config,
                                                   uint64_t seed, lgcps_reference_table** out);
LGCPS_API size_t lgcps_reference_table_size(const lgcps_reference_table* table);
LGCPS_API void lgcps_reference_table_free(lgcps_reference_table* table);
LGCPS_API lgcps_status lgcps_forest_train(const lgcps_reference_table* table,
                                          const lgcps_choice_config* config, uint64_t seed,
                                          lgcps_forest** out);
LGCPS_API lgcps_status lgcps_forest_choose(const lgcps_forest* forest,
                                           const lgcps_pattern* observed,
                                           const lgcps_summary_options* summary,
                                           lgcps_choice* out);
LGCPS_API void lgcps_forest_free(lgcps_forest* forest);

#ifdef __cplusplus
}
#endif

#endif
