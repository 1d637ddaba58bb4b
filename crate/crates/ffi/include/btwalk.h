#ifndef BTWALK_H
#define BTWALK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum BtwStatus {
  BTW_STATUS_OK = 0,
  BTW_STATUS_NULL_POINTER = 1,
  BTW_STATUS_INVALID_UTF8 = 2,
  BTW_STATUS_CONFIG_ERROR = 3,
  BTW_STATUS_MATH_ERROR = 4,
  BTW_STATUS_IO_ERROR = 5,
  BTW_STATUS_CHECK_FAILED = 6,
  BTW_STATUS_PANIC = 7,
} BtwStatus;

// Parsed experiment configuration.
typedef struct BtwConfig BtwConfig;

// A vertex of the building of SL₃(ℚ_p).
typedef struct BtwVertex BtwVertex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread; empty if none.
// The pointer stays valid until the next failing call on the same thread.
const char *btw_last_error_message(void);

// Releases a string returned by this library.
//
// # Safety
// `s` is null or a string returned by this library and not yet freed.
void btw_string_free(char *s);

// Parses a JSON experiment configuration.
//
// # Safety
// `json` is a nul-terminated string; `out` is valid for writes.
enum BtwStatus btw_config_from_json(const char *json, struct BtwConfig **out);

// Overrides the configured seed.
//
// # Safety
// `config` is null or a live handle.
enum BtwStatus btw_config_set_seed(struct BtwConfig *config, uint64_t seed);

// # Safety
// `config` is null or a handle from [`btw_config_from_json`] not yet freed.
void btw_config_free(struct BtwConfig *config);

// Runs one command (`"walk"`, `"lyapunov"`, `"opposition"`, `"stationary"`,
// `"germ"`, `"tree-demo"` or `"check"`). The report written to standard
// output by the command-line tool is returned in `report`. `out_dir` may be
// null; `workers = 0` uses all cores.
//
// # Safety
// `config` is a live handle; `command` is a nul-terminated string;
// `out_dir` is null or a nul-terminated string; `report` is valid for writes.
enum BtwStatus btw_run(const struct BtwConfig *config,
                       const char *command,
                       const char *out_dir,
                       uint32_t workers,
                       char **report);

// The standard vertex [ℤ_p³].
//
// # Safety
// `out` is valid for writes.
enum BtwStatus btw_vertex_standard(uint64_t p, struct BtwVertex **out);

// The vertex spanned by the columns of an invertible rational matrix given
// as 9 row-major rational strings.
//
// # Safety
// `entries` points to 9 nul-terminated strings; `out` is valid for writes.
enum BtwStatus btw_vertex_from_basis(uint64_t p,
                                     const char *const *entries,
                                     struct BtwVertex **out);

// g·x for g in SL₃(ℚ) given as 9 row-major rational strings.
//
// # Safety
// `x` is a live handle; `entries` points to 9 nul-terminated strings;
// `out` is valid for writes.
enum BtwStatus btw_vertex_act(const struct BtwVertex *x,
                              const char *const *entries,
                              struct BtwVertex **out);

// Canonical basis of a vertex as JSON: `{"basis": [[..],[..],[..]]}`.
//
// # Safety
// `x` is a live handle; `out` is valid for writes.
enum BtwStatus btw_vertex_to_json(const struct BtwVertex *x, char **out);

// # Safety
// `x` is null or a vertex handle not yet freed.
void btw_vertex_free(struct BtwVertex *x);

// Cartan type θ(x, y) as a JSON array of three rational strings.
//
// # Safety
// `x`, `y` are live handles; `out` is valid for writes.
enum BtwStatus btw_cartan_type(const struct BtwVertex *x, const struct BtwVertex *y, char **out);

// d(x, y)² as a rational string.
//
// # Safety
// `x`, `y` are live handles; `out` is valid for writes.
enum BtwStatus btw_distance_sq(const struct BtwVertex *x, const struct BtwVertex *y, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BTWALK_H */
