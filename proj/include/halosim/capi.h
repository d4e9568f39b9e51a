/* C interface to the halosim core. All entry points return a status code
 * (HS_OK on success); hs_last_error() describes the most recent failure on
 * the calling thread. Handles are opaque and freed with their *_free call.
 */
#ifndef HALOSIM_CAPI_H
#define HALOSIM_CAPI_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define HS_OK 0
#define HS_ERR_INVALID 1
#define HS_ERR_DIVERGED 2
#define HS_ERR_CONFIG 3
#define HS_ERR_IO 4
#define HS_ERR_NUMERIC 5
#define HS_ERR_NOT_REACHED 6

typedef struct hs_config hs_config;
typedef struct hs_result hs_result;

const char* hs_version(void);
const char* hs_last_error(void);

/* --- configuration ----------------------------------------------------- */

/* Load a JSON run configuration. `overrides` holds n dotted-path
 * assignments ("strategy.alpha=0.5") applied before preset expansion;
 * pass NULL/0 for none. */
int hs_config_load(const char* path, const char* const* overrides,
                   int n_overrides, hs_config** out);
int hs_config_parse(const char* json_text, const char* const* overrides,
                    int n_overrides, hs_config** out);
/* Canonical 16-hex-digit hash of the fully resolved configuration. */
int hs_config_hash(const hs_config* cfg, char* buf, size_t buflen);
void hs_config_free(hs_config* cfg);

/* --- execution ---------------------------------------------------------- */

/* Generate the trace, replay it, and write report.json / model.bin (plus
 * the trace when the config asks for it) under out_dir. out_dir may be
 * NULL to skip artifacts. Returns HS_ERR_DIVERGED when the run diverged;
 * the report is still produced. */
int hs_run(const hs_config* cfg, const char* out_dir, hs_result** out);

/* Replay a stored trace. Fails with HS_ERR_CONFIG when the trace's
 * embedded config hash does not match cfg. */
int hs_replay(const hs_config* cfg, const char* trace_path,
              const char* out_dir, hs_result** out);

/* Run config_path once per strategy preset (comma-separated names; NULL
 * selects the four local-SGD strategies) and write a comparison CSV. */
int hs_compare(const char* config_path, const char* presets_csv,
               const char* out_dir, const char* csv_path);

/* Run config_path once per value of a dotted config key and write the
 * sweep CSV (header: axis,value,final_loss,time_to_loss,tokens_to_loss,
 * diverged). values_csv is comma-separated JSON scalars. */
int hs_sweep(const char* config_path, const char* axis, const char* values_csv,
             const char* out_dir, const char* csv_path);

/* --- results ------------------------------------------------------------ */

int hs_result_diverged(const hs_result* r);
double hs_result_final_loss(const hs_result* r);
double hs_result_end_time(const hs_result* r);
double hs_result_total_samples(const hs_result* r);
uint64_t hs_result_trace_hash(const hs_result* r);
uint64_t hs_result_model_hash(const hs_result* r);
int hs_result_num_workers(const hs_result* r);
/* First simulated time at which the loss reaches target; HS_ERR_NOT_REACHED
 * when the run never got there. */
int hs_result_time_to_loss(const hs_result* r, double target, double* out);
int hs_result_samples_to_loss(const hs_result* r, double target, double* out);
int hs_result_breakdown(const hs_result* r, int worker, double* compute,
                        double* comm, double* stall);
/* Empirical staleness maxima recorded during replay. */
int hs_result_staleness(const hs_result* r, double* d_g, double* d_l);
void hs_result_free(hs_result* r);

/* --- timing model ------------------------------------------------------- */

int hs_p2p_time(const hs_config* cfg, const char* src_region,
                const char* dst_region, uint64_t bytes, double* out);
/* Ring all-reduce over all configured workers. */
int hs_ring_allreduce_time(const hs_config* cfg, uint64_t bytes, double* out);
int hs_compute_time(const hs_config* cfg, int local_steps, double speed,
                    double* out);
int hs_dyn_local_steps(int h_max, double speed, double s_fastest, int* out);

/* Timing-only run: generate the trace and report per-worker runtime
 * fractions without executing any numerics. Arrays hold max_workers
 * entries; *n_workers receives the worker count. */
int hs_timing_breakdown(const hs_config* cfg, double* compute, double* comm,
                        double* stall, int max_workers, int* n_workers);

/* --- convergence-bound utilities ---------------------------------------- */

/* Right-hand side of the convergence guarantee. squared_variant selects the
 * (1-beta_g^2) denominator form for the heterogeneity term. */
int hs_theorem_bound(double f0_minus_fstar, double eta0, double eta_min,
                     long steps, double beta_g, double beta_l,
                     double smoothness, double grad_bound, double sigma2,
                     double dg2, double dl2, int squared_variant, double* out);

/* 1/(x^3 (1-x)^3), the global-momentum trade-off curve. */
int hs_beta_g_tradeoff(double x, double* out);

#ifdef __cplusplus
}
#endif

#endif /* HALOSIM_CAPI_H */
