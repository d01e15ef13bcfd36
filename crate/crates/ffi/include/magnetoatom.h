#ifndef MAGNETOATOM_H
#define MAGNETOATOM_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum MaClass {
  MA_CLASS_CENTERED = 0,
  MA_CLASS_DECENTERED = 1,
  MA_CLASS_MIXED = 2,
} MaClass;

typedef enum MaStatus {
  MA_STATUS_OK = 0,
  MA_STATUS_NULL_POINTER = 1,
  MA_STATUS_INVALID_ARGUMENT = 2,
  MA_STATUS_OUT_OF_REGIME = 3,
  MA_STATUS_NOT_CONVERGED = 4,
  MA_STATUS_GRID_TOO_LARGE = 5,
  MA_STATUS_UNSUPPORTED_ORDER = 6,
  /**
   * A panic was caught at the boundary.
   */
  MA_STATUS_INTERNAL = 99,
} MaStatus;

/**
 * Opaque two-particle system.
 */
typedef struct MaSystem MaSystem;

typedef struct MaVariational {
  /**
   * Hartree.
   */
  double energy;
  double rho_mean;
  double d;
  /**
   * One of `MaClass`.
   */
  int32_t classification;
} MaVariational;

typedef struct MaOracle {
  /**
   * Extrapolated energy in Hartree.
   */
  double energy;
  double tolerance;
  /**
   * Energy on the finest grid.
   */
  double finest;
  bool converged;
} MaOracle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ma_version(void);

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t ma_last_error(char *buf, size_t len);

/**
 * Charge `e` and masses in electron units. Pass `m2 = INFINITY` for a static partner.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum MaStatus ma_system_new(double e, double m1, double m2, struct MaSystem **out);

/**
 * Finite-mass hydrogen.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum MaStatus ma_system_hydrogen(struct MaSystem **out);

/**
 * Positronium.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum MaStatus ma_system_positronium(struct MaSystem **out);

/**
 * # Safety
 * `sys` must be null or a handle from `ma_system_*` that was not freed yet.
 */
void ma_system_free(struct MaSystem *sys);

/**
 * # Safety
 * `sys` must be a live handle, `out` writable.
 */
enum MaStatus ma_system_reduced_mass(const struct MaSystem *sys, double *out);

/**
 * Perturbation coefficient of `B^n P^k` in internal units.
 *
 * # Safety
 * `sys` must be a live handle, `out` writable.
 */
enum MaStatus ma_pt_coefficient(const struct MaSystem *sys, uint32_t n, uint32_t k, double *out);

/**
 * Momentum above which the magnetic well exists, at effective field `b_eff`.
 *
 * # Safety
 * `sys` must be a live handle, `out` writable.
 */
enum MaStatus ma_p_saddle(const struct MaSystem *sys, double b_eff, double *out);

/**
 * Optimized variational ground state with the default search strategy.
 *
 * # Safety
 * `sys` must be a live handle, `out` writable.
 */
enum MaStatus ma_variational(const struct MaSystem *sys,
                             double b_eff,
                             double p_eff,
                             struct MaVariational *out);

/**
 * Finite-difference ground state on an `n × n` grid and `levels − 1`
 * refinements. `magnetic` places the grid on the outer well.
 *
 * # Safety
 * `sys` must be a live handle, `out` writable.
 */
enum MaStatus ma_oracle(const struct MaSystem *sys,
                        double b_eff,
                        double p_eff,
                        double d,
                        size_t n,
                        size_t levels,
                        bool magnetic,
                        struct MaOracle *out);

/**
 * Parse a `key = value` config into a system handle; field keys are ignored.
 *
 * # Safety
 * `text` must be a NUL-terminated string, `out` a valid handle slot.
 */
enum MaStatus ma_system_from_config(const char *text, struct MaSystem **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MAGNETOATOM_H */
