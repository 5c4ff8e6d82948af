/* C interface to the ladderlab core. Every call returns an ll_status; on
 * failure ll_last_error() holds a message for the calling thread. Handles are
 * opaque and owned by the caller, who releases them with the matching _free. */
#ifndef LADDERLAB_H
#define LADDERLAB_H

#include <stddef.h>

#if defined(__GNUC__)
#define LL_API __attribute__((visibility("default")))
#else
#define LL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ll_status {
    LL_OK = 0,
    LL_ERR_DOMAIN = 1,      /* argument outside the supported range */
    LL_ERR_CONVERGENCE = 2, /* tolerance not reached */
    LL_ERR_AMBIGUITY = 3,   /* zero structure of Z unresolved */
    LL_ERR_REGIME = 4,      /* U outside the range the functional is stated for */
    LL_ERR_FORMAT = 5,      /* unreadable file or config text */
    LL_ERR_INVARIANT = 6,   /* table fails a structural check */
    LL_ERR_NULL = 7,        /* required pointer argument was NULL */
    LL_ERR_INTERNAL = 8
} ll_status;

LL_API const char* ll_last_error(void);
LL_API const char* ll_status_name(ll_status status);
LL_API const char* ll_version(void);

typedef struct ll_eval_config {
    double target_abs_tol;
    int rs_correction_terms; /* 0..5 */
    int fd_order;            /* 2, 4 or 6 */
    double rs_crossover;
    double fd_step_divisor;
    double fd_check_rel;
} ll_eval_config;

LL_API void ll_eval_config_default(ll_eval_config* cfg);

typedef struct ll_integral {
    double value;
    double abs_error_est;
    long evaluations;
    int converged;
} ll_integral;

/* Point evaluations; cfg may be NULL for defaults. */
LL_API ll_status ll_theta(double t, const ll_eval_config* cfg, double* out);
LL_API ll_status ll_hardy_z(double t, const ll_eval_config* cfg, double* out);
LL_API ll_status ll_zeta_derivative_abs(double t, int r, const ll_eval_config* cfg, double* out);
LL_API ll_status ll_zero_count(double t, const ll_eval_config* cfg, long* out);
LL_API ll_status ll_s_of_t(double t, const ll_eval_config* cfg, double* out);
LL_API ll_status ll_s1_of_t(double t, const ll_eval_config* cfg, ll_integral* out);

/* ---- ladder tables ---------------------------------------------------- */

typedef struct ll_ladder_options {
    double t_start;
    double t_end;
    double step;
    double solve_tol;
    double tail_eps;
    int jobs;
    const char* cache_dir; /* NULL or "": $LADDERLAB_CACHE_DIR, else no persistence */
    ll_eval_config eval;
} ll_ladder_options;

LL_API void ll_ladder_options_default(ll_ladder_options* opts);

typedef struct ll_table ll_table;

typedef struct ll_table_info {
    size_t rows;
    double t_front;
    double t_back;
    double step;
    double solve_tol;
    int partial;
    size_t failures;
    long kernel_evaluations;
    double build_seconds;
} ll_table_info;

LL_API ll_status ll_table_build(const ll_ladder_options* opts, ll_table** out);
LL_API ll_status ll_table_load(const char* path, const char* cache_dir, ll_table** out);
LL_API ll_status ll_table_save(const ll_table* table, const char* path);
LL_API void ll_table_free(ll_table* table);
LL_API ll_status ll_table_get_info(const ll_table* table, ll_table_info* out);
LL_API ll_status ll_table_row(const ll_table* table, size_t i, double* t, double* phi1, double* energy,
                              double* slope);
/* message stays valid until the table is freed */
LL_API ll_status ll_table_failure(const ll_table* table, size_t i, double* t, const char** message);

LL_API ll_status ll_phi1(const ll_table* table, double t, double* out);
LL_API ll_status ll_iterate(const ll_table* table, double t, int k, double* out);
LL_API ll_status ll_phi1_inverse(const ll_table* table, double y, double* out);
LL_API ll_status ll_preimage_interval(const ll_table* table, double T, double U, double* a, double* b);
LL_API ll_status ll_table_energy(const ll_table* table, double t, double* out);

/* ---- integral functionals --------------------------------------------- */

typedef struct ll_functional_options {
    ll_eval_config eval;
    int points_per_oscillation;
    int max_depth;
    int rule_order;
    double rel_tol;
    int sign_samples;
} ll_functional_options;

LL_API void ll_functional_options_default(ll_functional_options* opts);

/* Holds a reference to the table, which must outlive the context. */
typedef struct ll_context ll_context;

LL_API ll_status ll_context_create(const ll_table* table, const ll_functional_options* opts, ll_context** out);
LL_API void ll_context_free(ll_context* ctx);

typedef struct ll_interval {
    double T;
    double U;
    double epsilon;
    double c_exp;
} ll_interval;

typedef struct ll_signal {
    int r;
    int n;
    int m;
    int l;
} ll_signal;

/* Names accepted by ll_functional, NULL-terminated. */
LL_API const char* const* ll_functional_names(void);

/* Evaluates the named functional. U outside the functional's range gives
 * LL_ERR_REGIME with the admissible range in ll_last_error(). */
LL_API ll_status ll_functional(const ll_context* ctx, const char* name, const ll_interval* spec,
                               const ll_signal* sig, ll_integral* out);
/* Right-hand-side shape with every unspecified constant set to 1. */
LL_API ll_status ll_functional_shape(const char* name, const ll_interval* spec, const ll_signal* sig,
                                     double* out);
/* Admissible U range of the named functional at spec->T, and its text form. */
LL_API ll_status ll_functional_range(const char* name, const ll_interval* spec, double* lo, double* hi,
                                     char* text, size_t text_len);

typedef double (*ll_weight_fn)(double t, void* user);
LL_API ll_status ll_weighted_product_energy(const ll_context* ctx, ll_weight_fn F, void* user,
                                            const ll_interval* spec, int n, ll_integral* out,
                                            int* sign_warning);

/* (2l)! / (l! 4^l) as a reduced fraction "p/q" and as a double. */
LL_API ll_status ll_moment_coefficient(int l, char* text, size_t text_len, double* value);

/* ---- verification suites ---------------------------------------------- */

typedef struct ll_config ll_config;

LL_API ll_status ll_config_new(ll_config** out);
LL_API ll_status ll_config_parse(const char* text, ll_config** out);
LL_API ll_status ll_config_load(const char* path, ll_config** out);
LL_API ll_status ll_config_set(ll_config* cfg, const char* key, const char* value);
/* Writes the config text into buf (NUL-terminated, truncated to len) and the
 * full length, without the NUL, into *needed. */
LL_API ll_status ll_config_text(const ll_config* cfg, char* buf, size_t len, size_t* needed);
LL_API ll_status ll_config_validate(const ll_config* cfg);
LL_API void ll_config_free(ll_config* cfg);

/* Claim ids of the suite, NULL-terminated. */
LL_API const char* const* ll_claim_ids(void);

typedef struct ll_suite_summary {
    int reports;
    int passed;
    int failed;
    int skipped;
    int recorded;
} ll_suite_summary;

/* Runs the enabled claims and writes the report bundle into the config's
 * out_dir. table may be NULL, in which case one is built or loaded per the
 * config. */
LL_API ll_status ll_run_suite(const ll_config* cfg, const ll_table* table, ll_suite_summary* out);

#ifdef __cplusplus
}
#endif

#endif
