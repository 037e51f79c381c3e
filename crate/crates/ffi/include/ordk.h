#ifndef ORDK_H
#define ORDK_H

/* Generated by cbindgen from the ordk-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define ORDK_OK 0

#define ORDK_VERIFY_FAILED 1

#define ORDK_PARSE_ERROR 2

#define ORDK_PRECONDITION 3

#define ORDK_INTERNAL 4

#define ORDK_NULL_ARGUMENT 5

#define ORDK_PANIC 6

/**
 * Opaque parsed certificate.
 */
typedef struct OrdkCert OrdkCert;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Factors a matrix and writes the certificate JSON to `out_cert_json`.
 *
 * `mode` is "ut", "sl" or "vk"; `ring` is "Q", "Fp:<p>" or "cyclo:<m>";
 * `window` 0 picks the default verification window. On error a diagnostic
 * is written to `out_message`.
 */
int32_t ordk_factor(const char *mode,
                    const char *ring,
                    uint32_t k,
                    const char *matrix_json,
                    uint32_t window,
                    char **out_cert_json,
                    char **out_message);

/**
 * Verifies a certificate JSON against a matrix JSON; the verification
 * report goes to `out_report_json`. Returns 0 when every check passes and
 * 1 when the replay fails a check.
 */
int32_t ordk_verify(const char *cert_json,
                    const char *matrix_json,
                    uint32_t window,
                    char **out_report_json,
                    char **out_message);

/**
 * Parses a certificate into an opaque handle, or returns null with a
 * diagnostic in `out_message`.
 */
struct OrdkCert *ordk_cert_parse(const char *cert_json, char **out_message);

/**
 * Releases a certificate handle. Null is ignored.
 */
void ordk_cert_free(struct OrdkCert *cert);

/**
 * Number of commutators in the certificate word, or -1 on null input.
 */
int64_t ordk_cert_word_len(const struct OrdkCert *cert);

/**
 * The order parameter k, or 0 on null input.
 */
uint32_t ordk_cert_k(const struct OrdkCert *cert);

/**
 * Claimed word length recorded in the certificate, or -1 on null input.
 */
int64_t ordk_cert_claimed_length(const struct OrdkCert *cert);

/**
 * Producer tag ("theorem1", "cor77", ...); free with `ordk_string_free`.
 */
char *ordk_cert_producer(const struct OrdkCert *cert);

/**
 * Replays a parsed certificate against a matrix JSON.
 */
int32_t ordk_cert_verify(const struct OrdkCert *cert,
                         const char *matrix_json,
                         uint32_t window,
                         char **out_report_json,
                         char **out_message);

/**
 * Releases a string returned by this library. Null is ignored.
 */
void ordk_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORDK_H */
