/* C interface of the qshedge pricing engine. */

#ifndef QSHEDGE_H
#define QSHEDGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by fallible entry points.
typedef enum QshStatus {
  QSH_OK = 0,
  QSH_INVALID_ARGUMENT = 1,
  QSH_PARSE_ERROR = 2,
  QSH_INSTANTANEOUS_PROFIT = 3,
  QSH_AIP_ONLY = 4,
  QSH_INTERNAL_ERROR = 5,
} QshStatus;

// Market classification values written by `qsh_classify`.
typedef enum QshClass {
  QSH_CLASS_NA = 0,
  QSH_CLASS_AIP_ONLY = 1,
  QSH_CLASS_IP = 2,
} QshClass;

// Closedness diagnostics written by `qsh_price`.
typedef enum QshClosedness {
  QSH_STRICTLY_CLOSED = 0,
  QSH_DEGENERATE_CLOSED = 1,
  QSH_BOUNDARY_CASE = 2,
  QSH_NOT_CLOSED = 3,
} QshClosedness;

// Opaque one-period market handle.
typedef struct QshMarket QshMarket;

// Opaque scenario-tree handle.
typedef struct QshTree QshTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent error on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *qsh_last_error(void);

// Parses a one-period model document. Returns null on error; see
// [`qsh_last_error`].
//
// # Safety
// `json` must be a valid NUL-terminated UTF-8 string.
struct QshMarket *qsh_market_from_json(const char *json);

// Frees a market handle; null is ignored.
//
// # Safety
// `market` must come from [`qsh_market_from_json`] and not be freed twice.
void qsh_market_free(struct QshMarket *market);

// Parses a tree model document. Returns null on error.
//
// # Safety
// `json` must be a valid NUL-terminated UTF-8 string.
struct QshTree *qsh_tree_from_json(const char *json);

// Frees a tree handle; null is ignored.
//
// # Safety
// `tree` must come from [`qsh_tree_from_json`] and not be freed twice.
void qsh_tree_free(struct QshTree *tree);

// Asset count d of the market.
//
// # Safety
// `market` must be a live handle.
size_t qsh_market_dimension(const struct QshMarket *market);

// Superhedging price of the payoff (JSON `PayoffSpec`, e.g.
// `{"call": {"strike": 100.0}}`).
//
// Writes the price to `price_out`; with status
// `QSH_INSTANTANEOUS_PROFIT` the price is negative infinity and
// `theta_out` is untouched. `theta_out`, when non-null, must hold
// `qsh_market_dimension` doubles and receives the optimal hedge.
// `closedness_out`, when non-null, receives a [`QshClosedness`] value.
//
// # Safety
// `market` must be a live handle; `payoff_json` a valid NUL-terminated
// UTF-8 string; out pointers either null or properly sized.
enum QshStatus qsh_price(const struct QshMarket *market,
                         const char *payoff_json,
                         double tolerance,
                         double *price_out,
                         double *theta_out,
                         int *closedness_out);

// Classifies the market: writes a [`QshClass`] to `class_out` and mirrors
// it in the status (NA -> OK, AIP-only -> QSH_AIP_ONLY, IP ->
// QSH_INSTANTANEOUS_PROFIT).
//
// # Safety
// `market` must be a live handle; `class_out` non-null.
enum QshStatus qsh_classify(const struct QshMarket *market, double tolerance, int *class_out);

// Global AIP and NA verdicts for a tree (1 = holds, 0 = fails).
//
// # Safety
// `tree` must be a live handle; out pointers may be null.
enum QshStatus qsh_tree_check(const struct QshTree *tree,
                              double tolerance,
                              int *global_aip_out,
                              int *global_na_out);

// Root cost of backward superhedging the payoff over the tree.
//
// # Safety
// `tree` must be a live handle; `payoff_json` a valid NUL-terminated
// UTF-8 string; `root_cost_out` non-null.
enum QshStatus qsh_tree_hedge_root(const struct QshTree *tree,
                                   const char *payoff_json,
                                   double tolerance,
                                   double *root_cost_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSHEDGE_H */
