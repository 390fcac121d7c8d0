/* fano_shg.h — C interface to the Fano-SHG simulation core.
 *
 * Conventions:
 *  - Every function that can fail returns fano_status; FANO_OK is 0.
 *  - On failure, fano_last_error() returns a thread-local message that stays
 *    valid until the next failing call on the same thread.
 *  - char** outputs receive malloc'd strings owned by the caller; release
 *    them with fano_string_free(). Outputs are written only on FANO_OK
 *    unless a function documents otherwise.
 *  - Pointers documented as "nullable" may be NULL to select defaults.
 */
#ifndef FANO_SHG_H
#define FANO_SHG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fano_status {
    FANO_OK = 0,
    FANO_ERR_INVALID_PARAM = 1,          /* parameter failed validation */
    FANO_ERR_NON_FINITE = 2,             /* state left the finite/physical region */
    FANO_ERR_NO_CONVERGENCE = 3,         /* iterative solver exhausted its budget */
    FANO_ERR_DEGENERATE_DENOMINATOR = 4, /* closed form evaluated at a pole */
    FANO_ERR_NOT_CONVERGED = 5,          /* operation requires a converged state */
    FANO_ERR_NO_BRACKET = 6,             /* calibration target not bracketed/monotone */
    FANO_ERR_BAD_INPUT = 7,              /* malformed request (name, JSON, range) */
    FANO_ERR_IO = 8,                     /* file could not be written/read */
    FANO_ERR_ORACLE = 9                  /* built-in validation suite failed */
} fano_status;

/* ------------------------------------------------------------------ */
/* Parameter sets                                                      */
/* ------------------------------------------------------------------ */

typedef struct fano_params fano_params;

/* Default-constructed parameter set (uncoupled converter, zero drive). */
fano_params* fano_params_create(void);

/* Named preset: "paper-optimum", "bare", or "self-oscillation".
 * Returns NULL and sets fano_last_error() on unknown names. */
fano_params* fano_params_create_preset(const char* name);

fano_params* fano_params_clone(const fano_params* p);
void fano_params_destroy(fano_params* p);

/* Real fields: omega_drive omega1 omega2 omega_eg1 omega_eg2 gamma1 gamma2
 * gamma_ee1 gamma_ee2 chi2. Complex fields: f1 f2 g eps_p.
 * Reading a complex field through fano_params_get yields its magnitude. */
fano_status fano_params_set(fano_params* p, const char* field, double value);
fano_status fano_params_set_complex(fano_params* p, const char* field, double re, double im);
fano_status fano_params_get(const fano_params* p, const char* field, double* out);
fano_status fano_params_get_complex(const fano_params* p, const char* field, double* re,
                                    double* im);
fano_status fano_params_validate(const fano_params* p);

/* ------------------------------------------------------------------ */
/* Time evolution                                                      */
/* ------------------------------------------------------------------ */

typedef struct fano_integrator_config {
    double dt_initial;         /* first trial step (default 0.01) */
    double rel_tol;            /* adaptive relative tolerance (1e-10) */
    double abs_tol;            /* adaptive absolute tolerance (1e-14) */
    double t_max;              /* evolution horizon (5e6) */
    double convergence_window; /* <= 0: automatic min(20/gamma_ee, t_max/10) */
    double convergence_eps;    /* settle when max|d/dt| < eps over a window (1e-9) */
    long long max_steps;       /* hard step budget (5e8) */
} fano_integrator_config;

/* Fills *cfg with the defaults above. */
void fano_integrator_config_init(fano_integrator_config* cfg);

typedef struct fano_steady_state {
    double alpha1_re, alpha1_im;   /* fundamental envelope */
    double alpha2_re, alpha2_im;   /* second-harmonic envelope */
    double rho_ge1_re, rho_ge1_im; /* emitter coherences */
    double rho_ge2_re, rho_ge2_im;
    double rho_ee1, rho_ee2;       /* excited-state populations */
    double y1, y2;                 /* inversions 2 rho_ee - 1 */
    double residual;               /* final max|d/dt| */
    int converged;
    double t_elapsed;
    long long steps;
    int stiffness_detected;
    double purity_excess_max;
} fano_steady_state;

/* Evolves the envelope equations from the zero state to steady state.
 * FANO_ERR_NON_FINITE if the state blows up; out still receives the final
 * best-effort values when t_max is reached without convergence
 * (converged = 0, status FANO_OK). */
fano_status fano_integrate(const fano_params* p, const fano_integrator_config* cfg,
                           fano_steady_state* out);

/* Same, additionally streaming the trajectory as CSV to csv_path with the
 * given significant digits (digits <= 0 selects 12). */
fano_status fano_integrate_dump(const fano_params* p, const fano_integrator_config* cfg,
                                const char* csv_path, int digits, fano_steady_state* out);

/* Continues a converged solution in the physical frame over one drive
 * period and reports the largest relative drift of the envelope magnitudes.
 * FANO_ERR_NOT_CONVERGED when the provided state is not converged. */
fano_status fano_verify_ansatz(const fano_params* p, const fano_steady_state* steady,
                               int t_probe_count, double* max_deviation);

/* ------------------------------------------------------------------ */
/* Closed-form steady-state amplitudes                                 */
/* ------------------------------------------------------------------ */

fano_status fano_alpha2_two_qe(const fano_params* p, double y1, double y2, double a1_re,
                               double a1_im, double* out_re, double* out_im);
fano_status fano_alpha2_single_qe(const fano_params* p, double y, double a1_re, double a1_im,
                                  double* out_re, double* out_im);
fano_status fano_alpha2_bare(const fano_params* p, double a1_re, double a1_im, double* out_re,
                             double* out_im);

/* ------------------------------------------------------------------ */
/* Algebraic steady state and derived quantities                       */
/* ------------------------------------------------------------------ */

/* Damped self-consistent iteration on the steady-state algebra.
 * init may be NULL (cold start). On FANO_ERR_NO_CONVERGENCE the last
 * iterate is still written to *out with converged = 0. */
fano_status fano_solve_fixed_point(const fano_params* p, const fano_steady_state* init,
                                   int max_iter, double tol, fano_steady_state* out);

typedef enum fano_method {
    FANO_METHOD_TIME_EVOLUTION = 0,
    FANO_METHOD_FIXED_POINT = 1
} fano_method;

typedef struct fano_enhancement_report {
    double alpha2_coupled_re, alpha2_coupled_im;
    double alpha2_bare_re, alpha2_bare_im;
    double intensity_ratio; /* |coupled|^2 / |bare|^2 */
    double chi2;
    double eps_p_re, eps_p_im;
    int coupled_converged;
    int bare_converged;
} fano_enhancement_report;

/* SH intensity of the coupled system over its decoupled copy (f1 = f2 =
 * g = 0) at identical chi2 and drive. cfg nullable (defaults). */
fano_status fano_enhancement(const fano_params* p, fano_method method,
                             const fano_integrator_config* cfg,
                             fano_enhancement_report* out);

/* Bisects |eps_p| in [eps_lo, eps_hi] until the steady inversion y2 of
 * emitter 2 is within tol_y2 of target_y2 (target in (-1, 0)). On success
 * the handle's drive amplitude is updated in place and *eps_out receives
 * |eps_p|. cfg nullable; tol_y2 <= 0 selects 1e-3. */
fano_status fano_calibrate_drive(fano_params* p, double target_y2, double eps_lo,
                                 double eps_hi, fano_method method,
                                 const fano_integrator_config* cfg, double tol_y2,
                                 double* eps_out);

/* ------------------------------------------------------------------ */
/* Parameter-space exploration                                         */
/* ------------------------------------------------------------------ */

/* Runs a search described by a JSON spec:
 *   { "base": {...params...}, "variables": [{"name": .., "lower": ..,
 *     "upper": ..}, ...], "strategy": "Grid"|"NelderMeadLike"|
 *     "RandomRestart", "objective": "CrudeEq9"|"FullSteadyState",
 *     "constrain_crude": bool, "grid_points": n, "restarts": n,
 *     "max_evals": n, "seed": n, "threads": n, "integrator": {...} }
 * Outputs (both optional, pass NULL to skip): a JSON summary and the
 * evaluation trace as CSV. Traces are byte-identical for any thread
 * count. */
fano_status fano_run_search(const char* spec_json, char** out_summary_json,
                            char** out_trace_csv);

/* One-axis sweep of the crude closed-form objective (plus the dynamic
 * objective when with_full != 0) over the given values. variable names as
 * in the search spec (unconstrained set). */
fano_status fano_sweep(const fano_params* p, const char* variable, const double* values,
                       size_t n_values, int with_full, const fano_integrator_config* cfg,
                       int csv_digits, char** out_csv);

/* ------------------------------------------------------------------ */
/* Reports and self-validation                                         */
/* ------------------------------------------------------------------ */

/* Full run report: integrate, verify the steady-envelope ansatz, compute
 * the enhancement, and serialize everything as JSON. Per-stage errors are
 * embedded in the report rather than failing the call; only setup errors
 * (invalid params/config) and blow-ups fail. trajectory_csv_path (nullable)
 * streams the trajectory of the main integration as CSV with csv_digits
 * significant digits (<= 0 selects 12). */
fano_status fano_run_report_json(const fano_params* p, const fano_integrator_config* cfg,
                                 fano_method enhancement_method,
                                 const char* trajectory_csv_path, int csv_digits,
                                 char** out_json);

/* Built-in oracle suite (frame consistency, closed-form reductions,
 * passivity ceiling, fixed-point/dynamics equivalence). Returns FANO_OK
 * when every oracle passes, FANO_ERR_ORACLE otherwise; *out_table (nullable)
 * receives the human-readable result table in both cases. inject_fault
 * != 0 flips the sign of the SH source term for the duration — the suite
 * must then fail. */
fano_status fano_validate(int inject_fault, char** out_table);

void fano_string_free(char* s);

/* Thread-local message for the most recent failure on this thread. */
const char* fano_last_error(void);

const char* fano_version(void);

#ifdef __cplusplus
}
#endif
#endif /* FANO_SHG_H */
