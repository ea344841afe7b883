#ifndef MECHSEARCH_H
#define MECHSEARCH_H

/* Generated by cbindgen from mechsearch-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum MsStatus {
  MS_STATUS_OK = 0,
  /**
   * A pointer argument was null or an argument was out of range.
   */
  MS_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Input text could not be parsed.
   */
  MS_STATUS_PARSE_ERROR = 2,
  /**
   * The graph violates valence rules.
   */
  MS_STATUS_VALENCE_ERROR = 3,
  /**
   * Geometry-to-graph perception failed.
   */
  MS_STATUS_PERCEPTION_ERROR = 4,
  /**
   * Embedding or mapping failed.
   */
  MS_STATUS_EMBED_ERROR = 5,
  /**
   * The calculator reported an error.
   */
  MS_STATUS_CALC_ERROR = 6,
  /**
   * A numerical search did not converge or verify.
   */
  MS_STATUS_UNCONVERGED = 7,
  MS_STATUS_INTERNAL_ERROR = 8,
} MsStatus;

/**
 * Opaque calculator handle.
 */
typedef struct MsCalculator MsCalculator;

/**
 * Opaque molecular graph handle.
 */
typedef struct MsMolGraph MsMolGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ms_last_error_message(void);

/**
 * # Safety
 * `text` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. The returned handle is freed with [`ms_molgraph_free`].
 */
enum MsStatus ms_molgraph_parse(const char *text, struct MsMolGraph **out);

/**
 * Parse an XYZ document and perceive its bonding.
 *
 * # Safety
 * As [`ms_molgraph_parse`].
 */
enum MsStatus ms_molgraph_from_xyz(const char *text, struct MsMolGraph **out);

/**
 * # Safety
 * `g` must be a handle from this library, not yet freed.
 */
void ms_molgraph_free(struct MsMolGraph *g);

/**
 * # Safety
 * `g` must be a live handle.
 */
size_t ms_molgraph_natoms(const struct MsMolGraph *g);

/**
 * Canonical key of a graph: equal keys mean the same species, stereo
 * included. Free with [`ms_string_free`].
 *
 * # Safety
 * `g` must be a live handle.
 */
char *ms_molgraph_canonical_key(const struct MsMolGraph *g);

/**
 * Hill-order formula. Free with [`ms_string_free`].
 *
 * # Safety
 * `g` must be a live handle.
 */
char *ms_molgraph_formula(const struct MsMolGraph *g);

/**
 * Plain-text serialization of a graph. Free with [`ms_string_free`].
 *
 * # Safety
 * `g` must be a live handle.
 */
char *ms_molgraph_to_text(const struct MsMolGraph *g);

/**
 * # Safety
 * `s` must have been returned by a string-returning function of this
 * library and not yet freed.
 */
void ms_string_free(char *s);

/**
 * Count distinct elementary-step products per edit size. Writes counts
 * for sizes 1..=n_max into `out_counts` (length `n_max`).
 *
 * # Safety
 * `g` must be a live handle; `out_counts` must point to at least `n_max`
 * writable entries.
 */
enum MsStatus ms_enumerate_count(const struct MsMolGraph *g,
                                 size_t n_max,
                                 bool conditional,
                                 size_t *out_counts);

/**
 * The reactive screened-Morse surrogate with default parameters.
 *
 * # Safety
 * `out` must be a valid pointer. Free the handle with
 * [`ms_calculator_free`].
 */
enum MsStatus ms_calculator_morse(struct MsCalculator **out);

/**
 * A 2-D verification surface by name: "muller-brown", "quadratic-bowl",
 * "rosenbrock", "saddle-quad" or "double-well".
 *
 * # Safety
 * `name` must be a valid NUL-terminated string; `out` a valid pointer.
 */
enum MsStatus ms_calculator_surface(const char *name, struct MsCalculator **out);

/**
 * # Safety
 * `calc` must be a handle from this library, not yet freed.
 */
void ms_calculator_free(struct MsCalculator *calc);

/**
 * Energy (kcal/mol) and optional gradient (kcal/mol/Å, 3 entries per
 * atom) of a structure. `symbols` holds one ASCII element letter per atom
 * ('H', 'C', 'N', 'O'); `coords` is row-major Nx3 in Å.
 *
 * # Safety
 * `calc` must be a live handle; `symbols` and `coords` must point to
 * `n_atoms` and `3 * n_atoms` readable entries; `out_energy` must be
 * writable; `out_gradient` is either null or `3 * n_atoms` writable
 * entries.
 */
enum MsStatus ms_energy(const struct MsCalculator *calc,
                        size_t n_atoms,
                        const uint8_t *symbols,
                        const double *coords,
                        double *out_energy,
                        double *out_gradient);

/**
 * Double-ended transition-state search between two structures sharing the
 * same atoms in the same order. Writes the forward barrier (kcal/mol) and
 * whether the path verified (single imaginary mode and IRC endpoints
 * matching the perceived endpoint identities).
 *
 * # Safety
 * `calc` must be a live handle; `symbols`, `r_coords` and `p_coords`
 * must point to `n_atoms` / `3 * n_atoms` readable entries;
 * `out_barrier` and `out_verified` must be writable.
 */
enum MsStatus ms_find_path(const struct MsCalculator *calc,
                           size_t n_atoms,
                           const uint8_t *symbols,
                           const double *r_coords,
                           const double *p_coords,
                           size_t n_images,
                           double *out_barrier,
                           bool *out_verified);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MECHSEARCH_H */
