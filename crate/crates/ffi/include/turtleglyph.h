#ifndef TURTLEGLYPH_H
#define TURTLEGLYPH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TgDiagram {
  TG_DIAGRAM_TURTLEBACK = 0,
  /**
   * Turtleback with the root split by a straight chord; the root must
   * have exactly two events.
   */
  TG_DIAGRAM_TURTLEBACK_CHORD = 1,
  TG_DIAGRAM_TREE = 2,
} TgDiagram;

/**
 * Result of every fallible call.
 */
typedef enum TgStatus {
  TG_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  TG_STATUS_NULL_ARGUMENT = 1,
  TG_STATUS_INVALID_UTF8 = 2,
  TG_STATUS_SYNTAX = 3,
  TG_STATUS_VALIDATION = 4,
  /**
   * The condition of a query has probability zero.
   */
  TG_STATUS_ZERO_CONDITION = 5,
  TG_STATUS_RUNTIME = 6,
  /**
   * A bug: the library panicked. The handle should not be reused.
   */
  TG_STATUS_INTERNAL = 7,
} TgStatus;

/**
 * Opaque parsed and validated model.
 */
typedef struct TgModel TgModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses and validates a model. On success `*out` owns a new handle.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TgStatus tg_model_parse(const char *src, struct TgModel **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `model` must come from `tg_model_parse` and not be freed twice.
 */
void tg_model_free(struct TgModel *model);

/**
 * Number of leaf atoms in the model, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t tg_model_leaf_count(const struct TgModel *model);

/**
 * Evaluates a query such as `P(L/S)` and writes its JSON envelope.
 *
 * # Safety
 * `model` must be a live handle, `query` a NUL-terminated string and `out`
 * a valid pointer.
 */
enum TgStatus tg_query_json(const struct TgModel *model, const char *query, char **out);

/**
 * Renders an SVG document on a square canvas of `size` pixels.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum TgStatus tg_render_svg(const struct TgModel *model,
                            enum TgDiagram kind,
                            uint32_t size,
                            char **out);

/**
 * Checks that every region's area equals its path product and writes the
 * report envelope.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum TgStatus tg_check_json(const struct TgModel *model, char **out);

/**
 * Frees a string returned through an `out` parameter. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void tg_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into the library.
 */
const char *tg_last_error(void);

/**
 * Library version, static.
 */
const char *tg_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TURTLEGLYPH_H */
