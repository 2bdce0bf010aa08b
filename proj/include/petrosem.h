/* petrosem.h - C interface to the petrosem analysis library.
 *
 * All functions return a status code: 0 success/correct, 1 error,
 * 2 incorrect operator, 3 inconclusive. On status 1 a human-readable
 * message is available from ps_last_error() (thread-local).
 */
#ifndef PETROSEM_H
#define PETROSEM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined _WIN32
#define PS_API __declspec(dllexport)
#else
#define PS_API __attribute__((visibility("default")))
#endif

enum ps_status {
    PS_OK = 0,
    PS_ERROR = 1,
    PS_INCORRECT = 2,
    PS_INCONCLUSIVE = 3
};

enum ps_space { PS_SPACE_CB = 0, PS_SPACE_HINF = 1, PS_SPACE_PPOW = 2 };

/* Opaque handle to a parsed operator specification. */
typedef struct ps_operator ps_operator;

PS_API const char* ps_version(void);
PS_API const char* ps_last_error(void);

/* Load an operator from a JSON file / JSON text. Returns PS_OK and a
 * handle the caller must release with ps_operator_free. */
PS_API int ps_operator_load_file(const char* path, ps_operator** out);
PS_API int ps_operator_load_json(const char* text, ps_operator** out);
PS_API void ps_operator_free(ps_operator* op);
PS_API int ps_operator_dims(const ps_operator* op, int* m, int* n, int* d);

typedef struct ps_run_opts {
    const char* out_dir; /* directory for reports/CSV, must exist */
    int grid_N;          /* points per axis, power of two */
    double grid_L;       /* period per axis */
    double t;            /* evolution horizon */
    double dt;           /* time step */
    int space;           /* ps_space */
    int j;               /* norm order */
    int budget;          /* sampling budget */
    double r_max;        /* max frequency radius */
    double omega1;       /* certificate exponent */
    uint64_t seed;
    int force;           /* evolve incorrect operators anyway */
} ps_run_opts;

/* Fill opts with the documented defaults. */
PS_API void ps_run_opts_default(ps_run_opts* opts);

/* The four batch commands. Outputs land in opts->out_dir; the return
 * value is the command exit code (see ps_status). */
PS_API int ps_analyze(const ps_operator* op, const ps_run_opts* opts);
PS_API int ps_evolve(const ps_operator* op, const ps_run_opts* opts);
PS_API int ps_expcheck(const ps_operator* op, const ps_run_opts* opts);
PS_API int ps_certify(const ps_operator* op, const ps_run_opts* opts);

#ifdef __cplusplus
}
#endif

#endif /* PETROSEM_H */
