#ifndef HERALDED_FOCK_H
#define HERALDED_FOCK_H

/* Generated by cbindgen from crates/ffi. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum HfStatus {
  HF_STATUS_OK = 0,
  HF_STATUS_NULL_POINTER = 1,
  HF_STATUS_INVALID_ARGUMENT = 2,
  HF_STATUS_NUMERIC = 3,
  HF_STATUS_IO = 4,
  HF_STATUS_PANIC = 5,
} HfStatus;

typedef enum HfClickPattern {
  HF_CLICK_PATTERN_NONE = 0,
  HF_CLICK_PATTERN_A_ONLY = 1,
  HF_CLICK_PATTERN_B_ONLY = 2,
  HF_CLICK_PATTERN_A_OR_B_SINGLE = 3,
  HF_CLICK_PATTERN_BOTH = 4,
} HfClickPattern;

typedef enum HfSchedule {
  HF_SCHEDULE_UNIFORM_RANDOM = 0,
  HF_SCHEDULE_STEPPED = 1,
} HfSchedule;

typedef enum HfTomoMode {
  HF_TOMO_MODE_FULL = 0,
  HF_TOMO_MODE_DIAGONAL = 1,
} HfTomoMode;

// Opaque homodyne dataset.
typedef struct HfDataset HfDataset;

// Opaque density matrix.
typedef struct HfDensityMatrix HfDensityMatrix;

// Herald-arm parameters.
typedef struct HfHeraldSpec {
  double split;
  double eta_click;
  double dark;
  enum HfClickPattern pattern;
} HfHeraldSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. Valid until the
// next failing call on the same thread; do not free.
const char *hf_last_error_message(void);

// Frees a string returned by this library.
//
// # Safety
// `s` must be NULL or a string returned by this library and not yet freed.
void hf_string_free(char *s);

// Pure Fock state `|n⟩⟨n|` with cutoff `dim`.
//
// # Safety
// `out` must be valid for writes.
enum HfStatus hf_fock_state(size_t n, size_t dim, struct HfDensityMatrix **out);

// Diagonal state from `len` populations.
//
// # Safety
// `probs` must point to `len` readable doubles; `out` must be valid for writes.
enum HfStatus hf_density_from_diagonal(const double *probs,
                                       size_t len,
                                       struct HfDensityMatrix **out);

// Parses the `{"dim", "re", "im"}` JSON form.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be valid for writes.
enum HfStatus hf_density_from_json(const char *json, struct HfDensityMatrix **out);

// Serializes to JSON; release the string with [`hf_string_free`].
//
// # Safety
// `rho` must be a live handle; `out` must be valid for writes.
enum HfStatus hf_density_to_json(const struct HfDensityMatrix *rho, char **out);

// # Safety
// `rho` must be NULL or a handle from this library that was not yet freed.
void hf_density_free(struct HfDensityMatrix *rho);

// Fock cutoff of `rho`, or 0 for NULL.
//
// # Safety
// `rho` must be NULL or a live handle.
size_t hf_density_dim(const struct HfDensityMatrix *rho);

// Element `ρ_mn`.
//
// # Safety
// `rho` must be a live handle; `re` and `im` must be valid for writes.
enum HfStatus hf_density_element(const struct HfDensityMatrix *rho,
                                 size_t m,
                                 size_t n,
                                 double *re,
                                 double *im);

// Loss channel with transmission `eta`, returning a new handle.
//
// # Safety
// `rho` must be a live handle; `out` must be valid for writes.
enum HfStatus hf_apply_loss(const struct HfDensityMatrix *rho,
                            double eta,
                            struct HfDensityMatrix **out);

// # Safety
// `out` must be valid for writes.
enum HfStatus hf_fock_wavefunction(size_t n, double x, double *out);

// # Safety
// `rho` must be a live handle; `out` must be valid for writes.
enum HfStatus hf_quadrature_pdf(const struct HfDensityMatrix *rho,
                                double theta,
                                double x,
                                double *out);

// # Safety
// `rho` must be a live handle; `out` must be valid for writes.
enum HfStatus hf_wigner_point(const struct HfDensityMatrix *rho, double x, double p, double *out);

// Radial Wigner minimum of a diagonal state.
//
// # Safety
// `rho` must be a live handle; `value` and `radius` must be valid for writes.
enum HfStatus hf_wigner_min(const struct HfDensityMatrix *rho, double *value, double *radius);

// # Safety
// `out` must be valid for writes.
enum HfStatus hf_cavity_enhancement(double r_in, double r_loop, double *out);

// # Safety
// `out` must be valid for writes.
enum HfStatus hf_cavity_finesse(double r_in, double r_loop, double *out);

// # Safety
// `out` must be valid for writes.
enum HfStatus hf_optimal_input_coupler(double r_loop, double *out);

// # Safety
// `out` must be valid for writes.
enum HfStatus hf_click_probability(size_t n, struct HfHeraldSpec spec, double *out);

// Heralded signal state and its per-pulse probability.
//
// # Safety
// `out_state` and `out_prob` must be valid for writes.
enum HfStatus hf_herald_state(double lambda,
                              struct HfHeraldSpec spec,
                              size_t dim,
                              struct HfDensityMatrix **out_state,
                              double *out_prob);

// Single- and two-photon herald rates (Hz).
//
// # Safety
// `r1` and `r2` must be valid for writes.
enum HfStatus hf_predicted_rates(double rep_rate,
                                 double gain,
                                 struct HfHeraldSpec spec,
                                 double *r1,
                                 double *r2);

// `R1² / (2·rep_rate)`.
double hf_two_photon_rate_law(double r1, double rep_rate);

// Samples `n` quadratures of `rho` behind detection efficiency `eta_d`.
// `steps` is used only by the stepped schedule.
//
// # Safety
// `rho` must be a live handle; `out` must be valid for writes.
enum HfStatus hf_sample(const struct HfDensityMatrix *rho,
                        double eta_d,
                        enum HfSchedule schedule,
                        size_t steps,
                        size_t n,
                        uint64_t seed,
                        struct HfDataset **out);

// # Safety
// `ds` must be NULL or a live handle.
size_t hf_dataset_len(const struct HfDataset *ds);

// # Safety
// `ds` must be a live handle; `theta` and `x` must be valid for writes.
enum HfStatus hf_dataset_record(const struct HfDataset *ds, size_t index, double *theta, double *x);

// Writes the `theta,x` CSV to `path`.
//
// # Safety
// `ds` must be a live handle; `path` a NUL-terminated string.
enum HfStatus hf_dataset_write_csv(const struct HfDataset *ds, const char *path);

// # Safety
// `ds` must be NULL or a handle from this library that was not yet freed.
void hf_dataset_free(struct HfDataset *ds);

// Maximum-likelihood reconstruction with detection-efficiency correction
// `eta_d` (1 disables it). `iterations` and `loglik` may be NULL.
//
// # Safety
// `ds` must be a live handle; `out` must be valid for writes; `iterations`
// and `loglik` must be NULL or valid for writes.
enum HfStatus hf_maxlik(const struct HfDataset *ds,
                        size_t dim,
                        double eta_d,
                        enum HfTomoMode mode,
                        double tol,
                        size_t max_iter,
                        struct HfDensityMatrix **out,
                        size_t *iterations,
                        double *loglik);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HERALDED_FOCK_H */
