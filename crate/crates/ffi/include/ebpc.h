#ifndef EBPC_H
#define EBPC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EbpcMethod {
  EBPC_METHOD_EBPC = 0,
  EBPC_METHOD_ZVC = 1,
  EBPC_METHOD_ZERO_RLE = 2,
  EBPC_METHOD_BPC = 3,
} EbpcMethod;

/**
 * Status codes shared by every entry point.
 */
typedef enum EbpcStatus {
  EBPC_STATUS_OK = 0,
  EBPC_STATUS_NULL_POINTER = 1,
  EBPC_STATUS_INVALID_PARAMS = 2,
  /**
   * An input word does not fit in the word width.
   */
  EBPC_STATUS_VALUE_OUT_OF_RANGE = 3,
  /**
   * The stream is truncated or does not decode.
   */
  EBPC_STATUS_CORRUPT_STREAM = 4,
  /**
   * The bytes are not a valid container.
   */
  EBPC_STATUS_BAD_FORMAT = 5,
  EBPC_STATUS_INTERNAL = 6,
} EbpcStatus;

/**
 * A serialized container: header plus payload.
 */
typedef struct EbpcBuffer EbpcBuffer;

/**
 * Decoded words.
 */
typedef struct EbpcWords EbpcWords;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Compress `len` words of width `m` with block size `n` and run field width
 * `k` using `method`. On success `*out` owns a new buffer.
 *
 * # Safety
 * `words` must point to `len` readable words (or may be null when `len` is
 * 0) and `out` must be writable.
 */
enum EbpcStatus ebpc_compress_with(enum EbpcMethod method,
                                   const uint32_t *words,
                                   size_t len,
                                   uint32_t m,
                                   size_t n,
                                   uint32_t k,
                                   struct EbpcBuffer **out);

/**
 * [`ebpc_compress_with`] using the EBPC method.
 *
 * # Safety
 * As for [`ebpc_compress_with`].
 */
enum EbpcStatus ebpc_compress(const uint32_t *words,
                              size_t len,
                              uint32_t m,
                              size_t n,
                              uint32_t k,
                              struct EbpcBuffer **out);

/**
 * Payload size in bits EBPC would produce, without building the stream.
 *
 * # Safety
 * `words` as for [`ebpc_compress_with`]; `out_bits` must be writable.
 */
enum EbpcStatus ebpc_compressed_size_bits(const uint32_t *words,
                                          size_t len,
                                          uint32_t m,
                                          size_t n,
                                          uint32_t k,
                                          uint64_t *out_bits);

/**
 * Decode a container produced by any method. On success `*out` owns the
 * decoded words.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes and `out` must be writable.
 */
enum EbpcStatus ebpc_decompress(const uint8_t *bytes, size_t len, struct EbpcWords **out);

/**
 * # Safety
 * `buf` must be null or a live buffer from this library.
 */
const uint8_t *ebpc_buffer_data(const struct EbpcBuffer *buf);

/**
 * Length in bytes, header included.
 *
 * # Safety
 * `buf` must be null or a live buffer from this library.
 */
size_t ebpc_buffer_len(const struct EbpcBuffer *buf);

/**
 * # Safety
 * `buf` must be null or a live buffer from this library.
 */
uint64_t ebpc_buffer_payload_bits(const struct EbpcBuffer *buf);

/**
 * # Safety
 * `buf` must be null or a buffer from this library not yet freed.
 */
void ebpc_buffer_free(struct EbpcBuffer *buf);

/**
 * # Safety
 * `words` must be null or a live handle from this library.
 */
const uint32_t *ebpc_words_data(const struct EbpcWords *words);

/**
 * # Safety
 * `words` must be null or a live handle from this library.
 */
size_t ebpc_words_len(const struct EbpcWords *words);

/**
 * # Safety
 * `words` must be null or a handle from this library not yet freed.
 */
void ebpc_words_free(struct EbpcWords *words);

/**
 * Static description of a status code.
 */
const char *ebpc_status_message(enum EbpcStatus status);

/**
 * Message for the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *ebpc_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EBPC_H */
