#ifndef NOMA_RA_H
#define NOMA_RA_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define NOMA_SCHEME_NOMA_RA 0

#define NOMA_SCHEME_MS_ALOHA 1

#define NOMA_SCHEME_CAPTURE_PHYSICAL 2

#define NOMA_SCHEME_CAPTURE_PAPER 3

#define NOMA_CAPTURE_PHYSICAL 0

#define NOMA_CAPTURE_PAPER 1

typedef enum NomaStatus {
  NOMA_STATUS_OK = 0,
  NOMA_STATUS_INVALID_ARGUMENT = 1,
  NOMA_STATUS_NULL_POINTER = 2,
  NOMA_STATUS_INTERNAL = 3,
  NOMA_STATUS_PANIC = 4,
} NomaStatus;

/**
 * Opaque closed-loop barring controller.
 */
typedef struct NomaBarringController NomaBarringController;

/**
 * Opaque table of binomial throughput values for `U = 1..=u_max`.
 */
typedef struct NomaThroughputMatrix NomaThroughputMatrix;

typedef struct NomaOptimalPoint {
  double lambda_star;
  double channel_load_star;
  double max_throughput;
  double max_norm_throughput;
  /**
   * Idle probability at the optimum under per-level Poisson arrivals.
   */
  double idle_threshold;
  /**
   * Idle probability with exactly `u_star` users; used by the controller.
   */
  double population_idle_threshold;
  uint64_t u_star;
} NomaOptimalPoint;

typedef struct NomaSimStats {
  uint64_t slots;
  double mean_normalized_throughput;
  double idle_channel_frequency;
  double std_error;
  double idle_std_error;
} NomaSimStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *noma_last_error_message(void);

/**
 * Probability that `s` of `u` packets sharing one channel of `l` levels are decoded.
 */
enum NomaStatus noma_cond_success_prob(uint64_t u, uint64_t s, uint32_t l, double *out);

/**
 * Expected successes with `users` users over `n` channels and `l` levels.
 */
enum NomaStatus noma_throughput_binomial(uint32_t n, uint32_t l, uint64_t users, double *out);

/**
 * Expected successes with Poisson(`lambda`) packets on every channel and level.
 */
enum NomaStatus noma_throughput_poisson(uint32_t n, uint32_t l, double lambda, double *out);

/**
 * MS-ALOHA over `n` channels with Poisson(`load`) packets per channel.
 */
enum NomaStatus noma_throughput_msaloha_poisson(uint32_t n, double load, double *out);

/**
 * MS-ALOHA over `n` channels with `users` users.
 */
enum NomaStatus noma_throughput_msaloha_binomial(uint32_t n, uint64_t users, double *out);

/**
 * MS-ALOHA with power capture, Poisson(`load`) packets per channel.
 */
enum NomaStatus noma_capture_throughput_poisson(uint32_t n,
                                                uint32_t l,
                                                double load,
                                                uint32_t capture_semantics,
                                                double *out);

/**
 * MS-ALOHA with power capture and `users` users.
 */
enum NomaStatus noma_capture_throughput_binomial(uint32_t n,
                                                 uint32_t l,
                                                 uint64_t users,
                                                 uint32_t capture_semantics,
                                                 double *out);

/**
 * Idle-channel probability with Poisson(`lambda`) packets per level.
 */
enum NomaStatus noma_idle_channel_prob(double lambda, uint32_t l, double *out);

/**
 * Idle-channel probability with exactly `users` users.
 */
enum NomaStatus noma_idle_channel_prob_binomial(uint32_t n,
                                                uint32_t l,
                                                uint64_t users,
                                                double *out);

enum NomaStatus noma_optimal_lambda(uint32_t n,
                                    uint32_t l,
                                    double tol,
                                    struct NomaOptimalPoint *out);

/**
 * Peak throughput with `l` levels relative to single-level MS-ALOHA.
 */
enum NomaStatus noma_max_gain_ratio(uint32_t l, double *out);

/**
 * Seeded Monte Carlo run with Poisson(`lambda`) packets per channel and level.
 */
enum NomaStatus noma_simulate_poisson(uint32_t n,
                                      uint32_t l,
                                      uint32_t scheme,
                                      double lambda,
                                      uint64_t slots,
                                      uint64_t seed,
                                      struct NomaSimStats *out);

/**
 * Seeded Monte Carlo run with `users` users each transmitting with `p_access`.
 */
enum NomaStatus noma_simulate_users(uint32_t n,
                                    uint32_t l,
                                    uint32_t scheme,
                                    uint64_t users,
                                    double p_access,
                                    uint64_t slots,
                                    uint64_t seed,
                                    struct NomaSimStats *out);

enum NomaStatus noma_matrix_new(uint32_t n,
                                uint32_t l,
                                uint64_t u_max,
                                struct NomaThroughputMatrix **out);

/**
 * Releases a matrix. Null is ignored; freeing twice is undefined.
 */
void noma_matrix_free(struct NomaThroughputMatrix *m);

/**
 * Largest tabulated user count; entries cover `1..=u_max`.
 */
enum NomaStatus noma_matrix_u_max(const struct NomaThroughputMatrix *m, uint64_t *out);

enum NomaStatus noma_matrix_value(const struct NomaThroughputMatrix *m,
                                  uint64_t users,
                                  double *out);

enum NomaStatus noma_matrix_peak_users(const struct NomaThroughputMatrix *m, uint64_t *out);

/**
 * Light- and heavy-load user counts matching a normalized throughput.
 */
enum NomaStatus noma_matrix_invert(const struct NomaThroughputMatrix *m,
                                   double t_obs,
                                   uint64_t *u_light,
                                   uint64_t *u_heavy);

enum NomaStatus noma_barring_new(uint32_t n,
                                 uint32_t l,
                                 uint64_t period_slots,
                                 uint64_t u_max,
                                 struct NomaBarringController **out);

/**
 * Releases a controller. Null is ignored; freeing twice is undefined.
 */
void noma_barring_free(struct NomaBarringController *c);

enum NomaStatus noma_barring_p_access(const struct NomaBarringController *c, double *out);

enum NomaStatus noma_barring_u_star(const struct NomaBarringController *c, uint64_t *out);

enum NomaStatus noma_barring_idle_threshold(const struct NomaBarringController *c, double *out);

/**
 * Feeds one period's measurements and writes the new access probability.
 * `light_load` may be null.
 */
enum NomaStatus noma_barring_update(struct NomaBarringController *c,
                                    double t_insta,
                                    double p_idle_insta,
                                    double *p_access,
                                    bool *light_load);

/**
 * Runs a JSON scenario and returns the per-period CSV. Release the string
 * with [`noma_string_free`].
 */
enum NomaStatus noma_run_scenario_json(const char *config_json, char **out_csv);

/**
 * Releases a string returned by this library. Null is ignored; freeing
 * twice is undefined.
 */
void noma_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NOMA_RA_H */
