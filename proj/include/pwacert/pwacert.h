/* C interface to the piecewise affine certification library. */
#ifndef PWACERT_PWACERT_H
#define PWACERT_PWACERT_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define PWC_API __declspec(dllexport)
#else
#define PWC_API __attribute__((visibility("default")))
#endif

typedef struct pwc_system pwc_system;
typedef struct pwc_certificate pwc_certificate;

/* Status codes; the stage codes double as process exit codes. */
enum {
  PWC_OK = 0,
  PWC_ERR_USAGE = 1,
  PWC_ERR_INTERNAL = 2,
  PWC_ERR_PARSE = 10,
  PWC_ERR_ANALYSIS = 20,
  PWC_ERR_SYNTHESIS = 30,
  PWC_ERR_ITERATION = 40,
  PWC_ERR_VALIDATION = 50
};

typedef struct pwc_options {
  int homogeneous;   /* 1 on, 0 off, -1 decided from the system */
  int max_iters;     /* 50 */
  double tol;        /* fixed-point tolerance, 1e-6 */
  int grid;          /* simulation seeds per axis, 41 */
  int steps;         /* simulation horizon, 60 */
  double solver_tol; /* conic feasibility tolerance, 1e-7 */
  int last_stage;    /* PWC_ERR_* stage code of the last stage to run */
} pwc_options;

/* Defaults; PWA_CERTIFY_SOLVER_TOL in the environment sets solver_tol. */
PWC_API void pwc_options_init(pwc_options* options);

/* Message of the last failure on the calling thread, never NULL. */
PWC_API const char* pwc_last_error(void);
/* Releases strings returned through char** out-parameters. */
PWC_API void pwc_string_free(char* text);

PWC_API int pwc_system_load(const char* path, pwc_system** out);
PWC_API void pwc_system_free(pwc_system* sys);
PWC_API int pwc_system_dimension(const pwc_system* sys);
PWC_API int pwc_system_cell_count(const pwc_system* sys);
/* Canonical JSON of the parsed system. */
PWC_API int pwc_system_to_json(const pwc_system* sys, char** out);

/* {"sw_bar": [[i,j],...], "in": [i,...], "disjoint": bool}, 1-based. */
PWC_API int pwc_switches(const pwc_system* sys, const pwc_options* options, char** out);

PWC_API int pwc_synthesize(const pwc_system* sys, const pwc_options* options,
                           pwc_certificate** out);
PWC_API int pwc_certificate_from_json(const pwc_system* sys, const char* text,
                                      pwc_certificate** out);
PWC_API int pwc_certificate_to_json(const pwc_system* sys, const pwc_certificate* cert,
                                    char** out);
PWC_API int pwc_certificate_levels(const pwc_certificate* cert, double* alpha, double* beta);
PWC_API void pwc_certificate_free(pwc_certificate* cert);

/* Re-checks a certificate; writes {"accepted", "checks": [...]} and returns
 * PWC_ERR_SYNTHESIS when a fatal check fails. */
PWC_API int pwc_verify(const pwc_system* sys, const pwc_certificate* cert,
                       const pwc_options* options, char** out);

/* Runs the stages up to options->last_stage. The report is written even on
 * failure; the return value is the report's exit code. cert_path may be NULL. */
PWC_API int pwc_run_pipeline(const char* system_path, const char* cert_path,
                             const pwc_options* options, char** report_json);

/* Simulates the system named in a report and checks every point against the
 * report's bounds. Violations are written as JSON lines; returns
 * PWC_ERR_VALIDATION when there is at least one. */
PWC_API int pwc_simulate_check(const char* report_json, const pwc_options* options,
                               char** violations);

/* Plot CSV for a report that carries a certificate. */
PWC_API int pwc_plot(const char* report_json, const pwc_options* options, int resolution,
                     char** csv);

#ifdef __cplusplus
}
#endif

#endif /* PWACERT_PWACERT_H */
