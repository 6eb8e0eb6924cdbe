/* C interface to the nmfvar library.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every call that can fail returns an nmfvar_status; on failure
 * nmfvar_last_error() describes the problem for the calling thread.
 * Matrices cross the boundary as row-major double arrays.
 */
#ifndef NMFVAR_H
#define NMFVAR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(NMFVAR_BUILDING)
#    define NMFVAR_API __declspec(dllexport)
#  else
#    define NMFVAR_API __declspec(dllimport)
#  endif
#else
#  define NMFVAR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nmfvar_status {
    NMFVAR_OK = 0,
    NMFVAR_INPUT_ERROR = 2,      /* unreadable or malformed data */
    NMFVAR_CONFIG_ERROR = 3,     /* infeasible or inconsistent settings */
    NMFVAR_NUMERIC_ERROR = 4,    /* NaN, degenerate data, no convergence */
    NMFVAR_INVALID_ARGUMENT = 5, /* null handle, short buffer */
    NMFVAR_INTERNAL_ERROR = 6
} nmfvar_status;

typedef enum nmfvar_covariates {
    NMFVAR_COVARIATES_LAGS = 0,
    NMFVAR_COVARIATES_KERNEL = 1,
    NMFVAR_COVARIATES_IDENTITY = 2
} nmfvar_covariates;

typedef enum nmfvar_init { NMFVAR_INIT_KMEANS = 0, NMFVAR_INIT_UNIFORM_RANDOM = 1 } nmfvar_init;

typedef enum nmfvar_fold_mode { NMFVAR_FOLDS_RANDOM = 0, NMFVAR_FOLDS_BLOCKS = 1 } nmfvar_fold_mode;

typedef struct nmfvar_frame nmfvar_frame;
typedef struct nmfvar_model nmfvar_model;
typedef struct nmfvar_forecast nmfvar_forecast;
typedef struct nmfvar_cv_report nmfvar_cv_report;

typedef struct nmfvar_fit_config {
    size_t rank; /* 0: 2, or the width of a fixed basis */
    size_t lags;
    nmfvar_covariates covariates;
    double kernel_beta;
    const char* transform;   /* e.g. "log1p,ma7"; NULL or "" for none */
    uint64_t seed;
    int max_iter;
    double tolerance;
    nmfvar_init init;
    const char* fixed_basis; /* NULL, "scalar", or a CSV path */
    const char* const* basis_names;
    size_t basis_name_count;
} nmfvar_fit_config;

typedef struct nmfvar_cv_config {
    nmfvar_fit_config fit;
    const size_t* ranks; /* NULL: fit.rank */
    size_t rank_count;
    const size_t* lags;  /* NULL: fit.lags */
    size_t lag_count;
    size_t folds;
    nmfvar_fold_mode fold_mode;
    unsigned threads;    /* 0: hardware concurrency */
} nmfvar_cv_config;

NMFVAR_API const char* nmfvar_version(void);
NMFVAR_API const char* nmfvar_last_error(void);
NMFVAR_API uint64_t nmfvar_default_seed(void);

NMFVAR_API void nmfvar_fit_config_init(nmfvar_fit_config* cfg);
NMFVAR_API void nmfvar_cv_config_init(nmfvar_cv_config* cfg);

/* Frames: P variables x T time points. */
NMFVAR_API nmfvar_status nmfvar_frame_read_csv(const char* path, nmfvar_frame** out);
NMFVAR_API nmfvar_status nmfvar_frame_from_values(size_t variables, size_t length, const double* values,
                                                  const char* const* names, const char* const* labels,
                                                  nmfvar_frame** out);
NMFVAR_API size_t nmfvar_frame_variables(const nmfvar_frame* f);
NMFVAR_API size_t nmfvar_frame_length(const nmfvar_frame* f);
NMFVAR_API void nmfvar_frame_free(nmfvar_frame* f);

/* Fitting and models. */
NMFVAR_API nmfvar_status nmfvar_fit(const nmfvar_frame* frame, const nmfvar_fit_config* cfg, nmfvar_model** out);
NMFVAR_API nmfvar_status nmfvar_model_write_artifacts(const nmfvar_model* m, const char* dir);
NMFVAR_API nmfvar_status nmfvar_model_save(const nmfvar_model* m, const char* path);
NMFVAR_API nmfvar_status nmfvar_model_load(const char* path, nmfvar_model** out);
NMFVAR_API void nmfvar_model_free(nmfvar_model* m);

NMFVAR_API size_t nmfvar_model_variables(const nmfvar_model* m);
NMFVAR_API size_t nmfvar_model_rank(const nmfvar_model* m);
NMFVAR_API size_t nmfvar_model_lag_order(const nmfvar_model* m);
NMFVAR_API int nmfvar_model_iterations(const nmfvar_model* m);
NMFVAR_API double nmfvar_model_r_squared(const nmfvar_model* m);
/* P x Q row-major into out[capacity]. */
NMFVAR_API nmfvar_status nmfvar_model_basis(const nmfvar_model* m, double* out, size_t capacity);
/* D blocks of P x P (lag 1 first) and the P intercepts. */
NMFVAR_API nmfvar_status nmfvar_model_var_coefficients(const nmfvar_model* m, double* lags, size_t lags_capacity,
                                                       double* intercept, size_t intercept_capacity);
NMFVAR_API nmfvar_status nmfvar_model_spectral_radius(const nmfvar_model* m, double* radius, int* stationary);
/* Writes min(capacity, length) entries; *length receives the full length. */
NMFVAR_API nmfvar_status nmfvar_model_objective_trace(const nmfvar_model* m, double* out, size_t capacity,
                                                      size_t* length);

/* Forecasts in original units, P x horizon. */
NMFVAR_API nmfvar_status nmfvar_model_forecast(const nmfvar_model* m, size_t horizon, nmfvar_forecast** out);
NMFVAR_API size_t nmfvar_forecast_horizon(const nmfvar_forecast* f);
NMFVAR_API size_t nmfvar_forecast_variables(const nmfvar_forecast* f);
NMFVAR_API int nmfvar_forecast_smoothed_scale(const nmfvar_forecast* f);
NMFVAR_API nmfvar_status nmfvar_forecast_values(const nmfvar_forecast* f, double* out, size_t capacity);
NMFVAR_API nmfvar_status nmfvar_forecast_write_csv(const nmfvar_forecast* f, const char* path);
NMFVAR_API void nmfvar_forecast_free(nmfvar_forecast* f);

/* Cross-validation over (rank, lag) candidates. */
NMFVAR_API nmfvar_status nmfvar_cross_validate(const nmfvar_frame* frame, const nmfvar_cv_config* cfg,
                                               nmfvar_cv_report** out);
NMFVAR_API size_t nmfvar_cv_report_candidate_count(const nmfvar_cv_report* r);
NMFVAR_API size_t nmfvar_cv_report_chosen(const nmfvar_cv_report* r);
NMFVAR_API nmfvar_status nmfvar_cv_report_candidate(const nmfvar_cv_report* r, size_t index, size_t* rank,
                                                    size_t* lag, double* mean_sse);
/* Text table owned by the report. */
NMFVAR_API const char* nmfvar_cv_report_table(const nmfvar_cv_report* r);
NMFVAR_API nmfvar_status nmfvar_cv_report_write_json(const nmfvar_cv_report* r, const char* path);
NMFVAR_API void nmfvar_cv_report_free(nmfvar_cv_report* r);

NMFVAR_API nmfvar_status nmfvar_parameter_reduction(uint64_t p, uint64_t q, uint64_t d, uint64_t* nmfvar_params,
                                                    uint64_t* var_params, double* ratio);

#ifdef __cplusplus
}
#endif

#endif
