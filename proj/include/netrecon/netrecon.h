/* SPDX-License-Identifier: Apache-2.0
 *
 * C interface to libnetrecon. Every call returns an nr_status; on failure
 * nr_last_error() holds a message for the calling thread until its next call.
 */
#ifndef NETRECON_H
#define NETRECON_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nr_status {
  NR_OK = 0,
  NR_INVALID_ARGUMENT = 1,
  NR_PARSE_ERROR = 2,
  NR_IO_ERROR = 3,
  NR_UNSUPPORTED = 4,
  NR_TOO_LARGE = 5,
  NR_INTERNAL = 6
} nr_status;

typedef struct nr_data nr_data;
typedef struct nr_fit nr_fit;

typedef struct nr_em_config {
  double tol;
  uint64_t max_iter;
  uint64_t restarts;
  uint64_t seed;
  int sparse;
  uint64_t kmax;
  uint64_t edge_states;
} nr_em_config;

const char* nr_last_error(void);
const char* nr_status_name(nr_status status);

void nr_em_config_default(nr_em_config* config);

/* format: "pairs", "tally" or "multimodal". directed is ignored for multimodal. */
nr_status nr_data_read(const char* path, const char* format, int directed, nr_data** out);
void nr_data_free(nr_data* data);
nr_status nr_data_size(const nr_data* data, uint64_t* nodes, uint64_t* pairs);
/* Mean degree of the network with every pair reported at least min_positive times. */
nr_status nr_data_threshold_degree(const nr_data* data, uint32_t min_positive, double* out);

/* model: "bernoulli", "poisson", "config", "multimodal", "per_node", "edge_types". */
nr_status nr_fit_run(const char* model, const nr_data* data, const nr_em_config* config,
                     nr_fit** out);
/* Rebuilds a fit from a params.json report and the data it was fitted to. */
nr_status nr_fit_load(const char* report_path, const nr_data* data, nr_fit** out);
void nr_fit_free(nr_fit* fit);

nr_status nr_fit_summary(const nr_fit* fit, double* objective, uint64_t* iterations,
                         int* converged);
/* Writes params.json, edges.tsv and trace.tsv into out_dir. */
nr_status nr_fit_write(const nr_fit* fit, const char* out_dir, double q_min);
nr_status nr_fit_export_dot(const nr_fit* fit, const char* path, double q_min);
nr_status nr_fit_mean_degree(const nr_fit* fit, double* mean, double* std);
/* functional: "mean-degree" or "edge-count". */
nr_status nr_fit_estimate(const nr_fit* fit, const char* functional, uint64_t samples,
                          uint64_t seed, double* mean, double* std);
/* Draws networks and writes them as "sample<TAB>i<TAB>j<TAB>A_ij" lines. */
nr_status nr_fit_sample_write(const nr_fit* fit, uint64_t samples, uint64_t seed,
                              const char* path);
/* Three-band agreement with labelled pairs ("i<TAB>j<TAB>high|medium|low"). */
nr_status nr_fit_band_agreement(const nr_fit* fit, const char* labels_path, double* out);

/* Writes truth.tsv, observations.tsv and spec.json into out_dir. */
nr_status nr_synth_run(const char* spec_path, const char* out_dir);

/* Exact marginals by enumeration at the parameters of a params.json report.
 * Writes "i<TAB>j<TAB>Q(0)..." rows and a "# log_evidence" line to path. */
nr_status nr_oracle_run(const char* report_path, const nr_data* data, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* NETRECON_H */
