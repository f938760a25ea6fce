/* C interface to the v2gq library: radial-feeder power flow, converter
 * reactive dispatch, and parking-lot placement search.
 *
 * Every object is an opaque handle released with its matching *_free
 * function. Functions that can fail return a v2gq_status; the message for the
 * most recent failure on the calling thread is available from
 * v2gq_last_error(). Handles may be read from several threads at once but
 * must not be freed while in use.
 */
#ifndef V2GQ_V2GQ_H
#define V2GQ_V2GQ_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(V2GQ_BUILDING)
#    define V2GQ_API __declspec(dllexport)
#  else
#    define V2GQ_API __declspec(dllimport)
#  endif
#else
#  define V2GQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum v2gq_status {
    V2GQ_OK = 0,
    V2GQ_ERR_IO = 1,          /* file missing or unwritable */
    V2GQ_ERR_PARSE = 2,       /* malformed case or profile file */
    V2GQ_ERR_VALIDATION = 3,  /* well-formed input violating a model invariant */
    V2GQ_ERR_CONVERGENCE = 4, /* power flow failed to converge */
    V2GQ_ERR_INFEASIBLE = 5,  /* request cannot be satisfied (e.g. more lots than candidates) */
    V2GQ_ERR_ARGUMENT = 6,    /* bad argument to an API call */
    V2GQ_ERR_INTERNAL = 7
} v2gq_status;

typedef enum v2gq_mode {
    V2GQ_MODE_NONE = 0,     /* no reactive support */
    V2GQ_MODE_DGQ = 1,      /* PV inverters only */
    V2GQ_MODE_DGQ_V2GQ = 2  /* PV inverters and parking lots */
} v2gq_mode;

typedef struct v2gq_case v2gq_case;
typedef struct v2gq_solution v2gq_solution;
typedef struct v2gq_simulation v2gq_simulation;
typedef struct v2gq_placement v2gq_placement;

V2GQ_API const char* v2gq_version(void);
V2GQ_API const char* v2gq_last_error(void);
V2GQ_API const char* v2gq_status_name(v2gq_status status);

/* ---- cases ------------------------------------------------------------ */

/* format: "text", "json", or NULL to pick by file extension. */
V2GQ_API v2gq_status v2gq_case_load(const char* path, const char* format, v2gq_case** out);
/* path NULL: use the `profiles` entry of the case file. */
V2GQ_API v2gq_status v2gq_case_load_profiles(v2gq_case* c, const char* path);
V2GQ_API v2gq_status v2gq_case_write(const v2gq_case* c, const char* path, const char* format);
V2GQ_API void v2gq_case_free(v2gq_case* c);

V2GQ_API size_t v2gq_case_bus_count(const v2gq_case* c);
V2GQ_API size_t v2gq_case_branch_count(const v2gq_case* c);
V2GQ_API int v2gq_case_bus_id(const v2gq_case* c, size_t index);
V2GQ_API size_t v2gq_case_pv_count(const v2gq_case* c);
V2GQ_API size_t v2gq_case_lot_count(const v2gq_case* c);
V2GQ_API int v2gq_case_has_profiles(const v2gq_case* c);

/* ---- power flow ------------------------------------------------------- */

typedef struct v2gq_solver_options {
    double tolerance;   /* per-unit mismatch, default 1e-8 */
    int max_iterations; /* default 50 */
} v2gq_solver_options;

V2GQ_API void v2gq_solver_defaults(v2gq_solver_options* opts);

/* hour < 0: nominal bus loads, devices ignored. hour in 0..23: hourly loads
 * and device active power (profiles required), all device Q = 0. */
V2GQ_API v2gq_status v2gq_solve(const v2gq_case* c, int hour, const v2gq_solver_options* opts,
                                v2gq_solution** out);
V2GQ_API void v2gq_solution_free(v2gq_solution* s);

V2GQ_API size_t v2gq_solution_bus_count(const v2gq_solution* s);
V2GQ_API v2gq_status v2gq_solution_bus(const v2gq_solution* s, size_t index, int* bus_id, double* v_pu,
                                       double* angle_rad);
V2GQ_API int v2gq_solution_iterations(const v2gq_solution* s);
V2GQ_API double v2gq_solution_mismatch(const v2gq_solution* s);
V2GQ_API double v2gq_solution_losses(const v2gq_solution* s);
V2GQ_API void v2gq_solution_violations(const v2gq_solution* s, size_t* voltage, size_t* thermal);
/* Bus and branch tables; path NULL writes to stdout. */
V2GQ_API v2gq_status v2gq_solution_write(const v2gq_solution* s, const char* path);

/* ---- two-bus formulas ------------------------------------------------- */

typedef struct v2gq_two_bus {
    double v1, delta1; /* per-unit, radians */
    double v2, delta2;
    double r, x;       /* series impedance, per-unit */
} v2gq_two_bus;

/* reactive_line != 0 uses the X >> R approximation (r ignored). */
V2GQ_API v2gq_status v2gq_two_bus_transfer(const v2gq_two_bus* s, int reactive_line, double* p12, double* q12);
/* Directions: +1 bus 1 -> bus 2, -1 bus 2 -> bus 1, 0 none. */
V2GQ_API v2gq_status v2gq_two_bus_direction(const v2gq_two_bus* s, int* active, int* reactive);

/* ---- 24-hour simulation ----------------------------------------------- */

typedef struct v2gq_scenario {
    v2gq_mode mode;
    double weight_voltage; /* a, default 0.6 */
    double weight_loss;    /* b, default 0.1 */
    double weight_cost;    /* c, default 0.3 */
    double v_ref;          /* default 1.0 */
    double tolerance;
    int max_iterations;
} v2gq_scenario;

typedef struct v2gq_objective {
    double v_dev;
    double loss;
    double cost;
    double scalar;
    int feasible;
    double violation;
} v2gq_objective;

typedef struct v2gq_summary {
    v2gq_objective objective;
    double min_voltage;
    double max_voltage;
    double total_losses;
} v2gq_summary;

V2GQ_API void v2gq_scenario_defaults(v2gq_scenario* sc);

/* Runs the day with lots at the buses given in the case file. */
V2GQ_API v2gq_status v2gq_simulate(const v2gq_case* c, const v2gq_scenario* sc, v2gq_simulation** out);
V2GQ_API void v2gq_simulation_free(v2gq_simulation* sim);
V2GQ_API void v2gq_simulation_summary(const v2gq_simulation* sim, v2gq_summary* out);
/* Hourly objective a*sum|V_ref - V| + b*P_loss with and without dispatch. */
V2GQ_API v2gq_status v2gq_simulation_hour(const v2gq_simulation* sim, int hour, double* objective,
                                          double* base_objective, double* min_voltage);
/* Writes voltages.csv and dispatch.csv into out_dir (created if missing). */
V2GQ_API v2gq_status v2gq_simulation_write(const v2gq_simulation* sim, const char* out_dir);

/* ---- placement search ------------------------------------------------- */

typedef struct v2gq_ga_options {
    int population;    /* even, >= 4; default 40 */
    int generations;   /* default 60 */
    uint64_t seed;     /* default 1 */
    double mutation_rate;
    int lots;          /* 0: as many lots as the case file lists */
    const int* candidates; /* NULL: every non-slack bus */
    size_t candidate_count;
    unsigned threads;  /* 0: hardware concurrency */
} v2gq_ga_options;

V2GQ_API void v2gq_ga_defaults(v2gq_ga_options* opts);

V2GQ_API v2gq_status v2gq_optimize(const v2gq_case* c, const v2gq_scenario* sc, const v2gq_ga_options* opts,
                                   v2gq_placement** out);
V2GQ_API void v2gq_placement_free(v2gq_placement* p);
V2GQ_API size_t v2gq_placement_lot_count(const v2gq_placement* p);
/* Copies up to `capacity` bus ids of the best placement; objective may be NULL. */
V2GQ_API v2gq_status v2gq_placement_best(const v2gq_placement* p, int* buses, size_t capacity,
                                         v2gq_objective* objective);
V2GQ_API size_t v2gq_placement_archive_size(const v2gq_placement* p);
V2GQ_API size_t v2gq_placement_evaluations(const v2gq_placement* p);
/* Writes placements.csv into out_dir (created if missing). */
V2GQ_API v2gq_status v2gq_placement_write(const v2gq_placement* p, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* V2GQ_V2GQ_H */
