#ifndef QGE_QGE_H
#define QGE_QGE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define QGE_API __declspec(dllexport)
#elif defined(__GNUC__)
#  define QGE_API __attribute__((visibility("default")))
#else
#  define QGE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qge_status {
    QGE_OK = 0,
    QGE_ERR_PARAMETER = 1,
    QGE_ERR_PARSE = 2,
    QGE_ERR_VALIDATION = 3,
    QGE_ERR_SAMPLING = 4,
    QGE_ERR_BUDGET = 5,
    QGE_ERR_NONEXISTENT = 6,
    QGE_ERR_CONSTRUCTION = 7,
    QGE_ERR_ASSEMBLY = 8,
    QGE_ERR_IDENTITY = 9,
    QGE_ERR_DOMAIN = 10,
    QGE_ERR_NUMERICAL = 11,
    QGE_ERR_IO = 12,
    QGE_ERR_INTERNAL = 13
} qge_status;

typedef struct qge_graph qge_graph;
typedef struct qge_system qge_system;

QGE_API const char* qge_version(void);
/* Short lowercase name, e.g. "parse". */
QGE_API const char* qge_status_name(qge_status status);
/* Message of the last failed call on this thread; "" after a success. */
QGE_API const char* qge_last_error(void);
/* 0 means hardware concurrency. */
QGE_API void qge_set_threads(unsigned count);

/* Every char** result is heap-allocated and released with qge_free_string. */
QGE_API void qge_free_string(char* s);

QGE_API qge_status qge_graph_generate(int n, int d, uint64_t seed, qge_graph** out);
QGE_API qge_status qge_graph_parse(const char* text, qge_graph** out);
QGE_API void qge_graph_free(qge_graph* g);
QGE_API qge_status qge_graph_shape(const qge_graph* g, int* n, int* d, int* bonds);
QGE_API qge_status qge_graph_text(const qge_graph* g, char** out);
/* Spectral report: mu, beta, is_connected, is_bipartite, girth. */
QGE_API qge_status qge_graph_info_json(const qge_graph* g, char** out);
QGE_API qge_status qge_graph_census_json(const qge_graph* g, int t, char** out);

/* kind: "et" or "kirchhoff". */
QGE_API qge_status qge_sigma_csv(const char* kind, int d, char** out);

/* lengths_text may be NULL, in which case lengths are drawn from
   [1, 2) with length_seed. */
QGE_API qge_status qge_system_create(const qge_graph* g, const char* sigma_kind, const char* lengths_text,
                                     uint64_t length_seed, qge_system** out);
QGE_API void qge_system_free(qge_system* s);

typedef struct qge_variance_options {
    double K;
    int samples;
    int monte_carlo;
    uint64_t grid_seed;
    double kappa;
    /* "parity", "random", "constant" or "file" */
    const char* observable;
    uint64_t observable_seed;
    /* 2B lines "re im", read when observable is "file" */
    const char* observable_text;
} qge_variance_options;

QGE_API void qge_variance_defaults(qge_variance_options* opts);
/* {"B":..,"K":..,"samples":..,"estimate":..,"stderr":..} */
QGE_API qge_status qge_variance_json(const qge_system* s, const qge_variance_options* opts, char** out);

/* observable: "parity" or "random". CSV "t,norm,bound,bound_kind". */
QGE_API qge_status qge_walk_decay_csv(const qge_system* s, int T, const char* observable, uint64_t observable_seed,
                                      char** out);
/* CSV "value,multiplicity". */
QGE_API qge_status qge_walk_singular_csv(const qge_system* s, char** out);
/* CSV "k,multiplicity" of roots of det(U(k) - I) in [k_min, k_max]. */
QGE_API qge_status qge_spectrum_csv(const qge_system* s, double k_min, double k_max, double resolution, char** out);

/* Family sweep from key=value config text. Any output pointer may be NULL. */
QGE_API qge_status qge_experiment_run(const char* config_text, char** csv, char** metadata_json,
                                      char** canonical_config);

#ifdef __cplusplus
}
#endif

#endif
