#ifndef FOLKREG_H
#define FOLKREG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FolkregStatus {
  FOLKREG_STATUS_OK = 0,
  FOLKREG_STATUS_ARGUMENT = 1,
  FOLKREG_STATUS_STATE = 2,
  FOLKREG_STATUS_CAPACITY = 3,
  FOLKREG_STATUS_PRECONDITION = 4,
  FOLKREG_STATUS_INFEASIBLE = 5,
  FOLKREG_STATUS_NOT_FOUND = 6,
  FOLKREG_STATUS_PARSE = 7,
  FOLKREG_STATUS_DIAGNOSTIC = 8,
  FOLKREG_STATUS_NULL_POINTER = 9,
  FOLKREG_STATUS_INVALID_UTF8 = 10,
  FOLKREG_STATUS_PANIC = 11,
} FolkregStatus;

/**
 * A plain graph, used as the embedding target.
 */
typedef struct FolkregGraph FolkregGraph;

/**
 * A multipartite host, possibly edge-colored.
 */
typedef struct FolkregHost FolkregHost;

/**
 * Outcome of a pipeline run.
 */
typedef struct FolkregReport FolkregReport;

/**
 * Pipeline settings. The host supplies the part count and part size.
 */
typedef struct FolkregPipelineConfig {
  size_t delta;
  uint64_t epsilon_num;
  uint64_t epsilon_den;
  size_t m;
  size_t sample_trials;
  size_t max_rounds;
  size_t class_size_floor;
  size_t retries;
  uint64_t seed;
} FolkregPipelineConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *folkreg_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void folkreg_string_free(char *s);

/**
 * `(C(p,2) - 1) k²`.
 */
uint64_t folkreg_turan_bound(uint64_t p, uint64_t k);

/**
 * Exhaustive maximum of a `K_p`-free subgraph of `K_p(k)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FolkregStatus folkreg_turan_oracle(size_t p, size_t k, uint64_t *out);

/**
 * Random complete `p`-partite host with `r` uniformly random edge colors.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FolkregStatus folkreg_host_random(size_t p,
                                       size_t part_size,
                                       size_t r,
                                       uint64_t seed,
                                       struct FolkregHost **out);

/**
 * Parses the `partite` host text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` valid for writes.
 */
enum FolkregStatus folkreg_host_parse(const char *text, struct FolkregHost **out);

/**
 * Writes the host in its text format.
 *
 * # Safety
 * `host` must be a live handle and `out` valid for writes.
 */
enum FolkregStatus folkreg_host_to_text(const struct FolkregHost *host, char **out);

/**
 * Number of vertices of the host, 0 for null.
 *
 * # Safety
 * `host` must be null or a live handle.
 */
size_t folkreg_host_vertex_count(const struct FolkregHost *host);

/**
 * # Safety
 * `host` must be null or a handle not yet freed.
 */
void folkreg_host_free(struct FolkregHost *host);

/**
 * Random graph on `n` vertices with maximum degree at most `max_degree`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FolkregStatus folkreg_graph_random(size_t n,
                                        size_t max_degree,
                                        uint64_t seed,
                                        struct FolkregGraph **out);

/**
 * Parses the `graph <n> <m>` text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` valid for writes.
 */
enum FolkregStatus folkreg_graph_parse(const char *text, struct FolkregGraph **out);

/**
 * # Safety
 * `graph` must be null or a handle not yet freed.
 */
void folkreg_graph_free(struct FolkregGraph *graph);

/**
 * Library defaults for the given maximum degree and seed.
 */
struct FolkregPipelineConfig folkreg_pipeline_config_default(size_t delta, uint64_t seed);

/**
 * Runs the pipeline. Stage failures still yield a report (check
 * [`folkreg_report_success`]); only invalid inputs return an error status.
 *
 * # Safety
 * `host`, `target` and `config` must be live, `out` valid for writes.
 */
enum FolkregStatus folkreg_pipeline_run(const struct FolkregHost *host,
                                        const struct FolkregGraph *target,
                                        const struct FolkregPipelineConfig *config,
                                        struct FolkregReport **out);

/**
 * Whether the report holds a verified embedding; false for null.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
bool folkreg_report_success(const struct FolkregReport *report);

/**
 * Color of the embedded copy, or -1 when there is none.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
int64_t folkreg_report_color(const struct FolkregReport *report);

/**
 * Writes the report text; with `timings` false all stage times print as 0.
 *
 * # Safety
 * `report` must be live and `out` valid for writes.
 */
enum FolkregStatus folkreg_report_to_text(const struct FolkregReport *report,
                                          bool timings,
                                          char **out);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void folkreg_report_free(struct FolkregReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOLKREG_H */
