#ifndef ORCHESTRA_ORCHESTRA_H
#define ORCHESTRA_ORCHESTRA_H

/* C interface to the palette library. Every function returning orch_status leaves a
 * human-readable message in orch_last_error() on failure (per thread). Colors are
 * normalized CIELAB triples (l, a, b) in [0,1], stored palette-major: palette n, slot k,
 * channel c lives at index (n * K + k) * 3 + c. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(ORCH_BUILDING_LIBRARY)
#define ORCH_API __declspec(dllexport)
#else
#define ORCH_API __declspec(dllimport)
#endif
#else
#define ORCH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum orch_status {
  ORCH_OK = 0,
  ORCH_ERR_INVALID_ARGUMENT = 1,
  ORCH_ERR_IO = 2,
  ORCH_ERR_FORMAT = 3,
  ORCH_ERR_NUMERIC = 4,
  ORCH_ERR_NOT_FOUND = 5,
  ORCH_ERR_INTERNAL = 6
} orch_status;

typedef struct orch_dataset orch_dataset;
typedef struct orch_model orch_model;
typedef struct orch_report orch_report;
typedef struct orch_server orch_server;

ORCH_API const char* orch_version(void);
ORCH_API const char* orch_last_error(void);
ORCH_API const char* orch_status_string(orch_status s);

/* Warnings collected by the most recent call on this thread that can skip inputs
 * (dataset building, recoloring, benchmarks, server loading). */
ORCH_API size_t orch_warning_count(void);
ORCH_API const char* orch_warning(size_t i);

/* ---- datasets ---- */

ORCH_API orch_status orch_dataset_create(int k, int n, const double* colors, orch_dataset** out);
ORCH_API orch_status orch_dataset_load(const char* path, orch_dataset** out);
ORCH_API orch_status orch_dataset_save(const orch_dataset* d, const char* path);
ORCH_API void orch_dataset_free(orch_dataset* d);
ORCH_API int orch_dataset_k(const orch_dataset* d);
ORCH_API int orch_dataset_size(const orch_dataset* d);
/* Copies n*K*3 doubles. */
ORCH_API orch_status orch_dataset_colors(const orch_dataset* d, double* out, size_t len);
/* Copies n*K ints; identity when the dataset was never sorted. */
ORCH_API orch_status orch_dataset_provenance(const orch_dataset* d, int* out, size_t len);

/* Builds a dataset from a manifest file (JSON, DatasetManifest field names). */
ORCH_API orch_status orch_build_dataset(const char* manifest_path, orch_dataset** out);

typedef struct orch_synth_options {
  int n_palettes;
  int k;
  int n_scenes;
  double noise;
  double drift;
  uint64_t seed;
} orch_synth_options;

ORCH_API orch_synth_options orch_synth_defaults(void);
/* Planted-correspondence synthetic palettes with shuffled slots. */
ORCH_API orch_status orch_synth_dataset(const orch_synth_options* opts, orch_dataset** out);

/* ---- ordering ---- */

/* method: "bps", "brightness" or "hue". */
ORCH_API orch_status orch_sort(const orch_dataset* in, const char* method, orch_dataset** out);
ORCH_API orch_status orch_ordering_objective(const orch_dataset* d, double* out);
ORCH_API orch_status orch_consecutive_distance(const orch_dataset* d, double* out);

/* ---- models ---- */

typedef struct orch_train_options {
  uint64_t seed;
  int iters;          /* SCG steps (gplvm) or EM iterations (gmm) */
  int latent_dim;     /* q for gplvm, PCA dimension for gmm */
  int gmm_components;
} orch_train_options;

ORCH_API orch_train_options orch_train_defaults(const char* method);

typedef struct orch_model_info {
  int is_gplvm;
  int k;
  int q;
  int n;               /* training palettes (gplvm) or mixture components (gmm) */
  int degenerate;
  size_t trace_length; /* NLL (gplvm) or EM log-likelihood (gmm) entries */
  double final_objective;
} orch_model_info;

/* method: "gplvm" or "gmm". The dataset should already be sorted. */
ORCH_API orch_status orch_model_train(const orch_dataset* sorted, const char* method, const orch_train_options* opts,
                                      orch_model** out);
ORCH_API orch_status orch_model_load(const char* path, orch_model** out);
ORCH_API orch_status orch_model_save(const orch_model* m, const char* path);
ORCH_API void orch_model_free(orch_model* m);
ORCH_API orch_status orch_model_info_get(const orch_model* m, orch_model_info* out);
/* Copies the training trace (trace_length doubles). */
ORCH_API orch_status orch_model_trace(const orch_model* m, double* out, size_t len);

/* GPLVM only: palette (3K doubles) and predictive variance at latent point x (q doubles). */
ORCH_API orch_status orch_model_backproject(const orch_model* m, const double* x, double* palette_out,
                                            double* variance_out);

/* Slot-aligned completion: colors holds 3K doubles, observed[k] != 0 marks known slots.
 * sim_iters and clamp only affect GPLVM models. */
ORCH_API orch_status orch_model_complete(const orch_model* m, const double* colors, const int* observed,
                                         int sim_iters, int clamp, double* palette_out);

/* GPLVM only: unordered observed colors (n_observed triples) are first aligned to the
 * model's slot order using its training palettes. */
ORCH_API orch_status orch_model_suggest(const orch_model* m, const double* observed, int n_observed, int sim_iters,
                                        int clamp, double* palette_out);

/* ---- recoloring ---- */

typedef struct orch_recolor_options {
  const char* segments; /* "grid:<cell>" */
  const char* palette_path; /* optional pool (dataset file): global recolor to the best match */
  int sim_iters;
  int preserve_luminance;
  uint64_t seed;
} orch_recolor_options;

ORCH_API orch_recolor_options orch_recolor_defaults(void);
/* model may be NULL when palette_path is set. */
ORCH_API orch_status orch_recolor_png(const char* image_path, const orch_model* model,
                                      const orch_recolor_options* opts, const char* out_path);

/* ---- benchmarks ---- */

/* kind: "ordering" or "completion". */
ORCH_API orch_status orch_bench_run(const char* kind, const char* config_path, orch_report** out);
ORCH_API orch_status orch_report_write_json(const orch_report* r, const char* path);
ORCH_API orch_status orch_report_write_csv(const orch_report* r, const char* path);
ORCH_API orch_status orch_report_write_svg(const orch_report* r, const char* path);
/* Mean error of a (method, condition) cell; ORCH_ERR_NOT_FOUND when absent. */
ORCH_API orch_status orch_report_cell_mean(const orch_report* r, const char* method, const char* condition,
                                           double* out);
ORCH_API void orch_report_free(orch_report* r);

/* ---- server ---- */

ORCH_API orch_status orch_server_create(const char* models_dir, const char* images_dir, orch_server** out);
/* Serves on a background thread; *bound_port receives the port (useful with port 0). */
ORCH_API orch_status orch_server_start(orch_server* s, const char* host, int port, int* bound_port);
/* Serves on the calling thread until orch_server_stop is called from elsewhere. */
ORCH_API orch_status orch_server_run(orch_server* s, const char* host, int port);
ORCH_API void orch_server_stop(orch_server* s);
ORCH_API void orch_server_free(orch_server* s);

#ifdef __cplusplus
}
#endif

#endif
