#ifndef CJKPACK_H
#define CJKPACK_H

#include <stddef.h>
#include <stdint.h>

typedef enum {
  CJK_DECODE_MODE_STRICT = 0,
  CJK_DECODE_MODE_LENIENT = 1,
} CjkDecodeMode;

typedef enum {
  CJK_STATUS_OK = 0,
  CJK_STATUS_NULL_POINTER = 1,
  CJK_STATUS_INELIGIBLE_CHAR = 2,
  CJK_STATUS_PAYLOAD_OUT_OF_RANGE = 3,
  CJK_STATUS_NOT_BASELINE = 4,
  CJK_STATUS_DECODE = 5,
  CJK_STATUS_VOCAB = 6,
  CJK_STATUS_UNKNOWN_ID = 7,
  CJK_STATUS_INVALID_ARGUMENT = 8,
  CJK_STATUS_BUFFER_TOO_SMALL = 9,
  CJK_STATUS_INVALID_UTF8 = 10,
  CJK_STATUS_PANIC = 11,
} CjkStatus;

/**
 * Opaque incremental decoder handle.
 */
typedef struct CjkDecoder CjkDecoder;

/**
 * Opaque id layout handle.
 */
typedef struct CjkVocabMap CjkVocabMap;

/**
 * A repacked character. `prefix_bits6` is 0x39, 0x3A or 0x3B.
 */
typedef struct {
  uint8_t prefix_bits6;
  uint16_t hi;
  uint16_t lo;
} CjkPackedChar;

typedef struct {
  size_t input_len;
  size_t output_len;
  double reduction;
  size_t prefix_emissions;
  size_t prefix_switches;
  size_t compressed_chars;
  size_t raw_bytes_passed;
} CjkEncodeReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the next call.
 */
const char *cjk_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cjk_version(void);

/**
 * Shared 6-bit prefix of a lead byte, or 0 when the byte is not in E4..EF.
 */
uint8_t cjk_classify_lead_byte(uint8_t b);

CjkStatus cjk_pack_char(uint8_t b1, uint8_t b2, uint8_t b3, CjkPackedChar *out);

/**
 * Writes the three UTF-8 bytes of `packed` to `out[0..3]`.
 */
CjkStatus cjk_unpack_char(CjkPackedChar packed, uint8_t *out);

/**
 * Default layout: bytes at `base`, extended payloads at `base + 256`, prefixes at `base + 512`.
 */
CjkVocabMap *cjk_vocab_map_new_contiguous(uint32_t base);

/**
 * Parses a JSON vocabulary map (`byte_ids`, `ext_ids`, `prefix_ids`, optional `vocab_size`).
 */
CjkStatus cjk_vocab_map_from_json(const char *json, CjkVocabMap **out);

void cjk_vocab_map_free(CjkVocabMap *vm);

/**
 * Compresses one baseline id sequence. The output is never longer than the input.
 */
CjkStatus cjk_encode_ids(const CjkVocabMap *vm,
                         const uint32_t *ids,
                         size_t len,
                         uint32_t *out,
                         size_t cap,
                         size_t *out_len,
                         CjkEncodeReport *report);

/**
 * Restores one compressed id sequence. The output is at most `len * 3 / 2` ids.
 * `decode_errors` (optional) receives the number of skipped problems in lenient mode.
 */
CjkStatus cjk_decode_ids(const CjkVocabMap *vm,
                         const uint32_t *ids,
                         size_t len,
                         CjkDecodeMode mode,
                         uint32_t *out,
                         size_t cap,
                         size_t *out_len,
                         size_t *decode_errors);

/**
 * Creates an incremental decoder bound to a copy of `vm`.
 */
CjkDecoder *cjk_decoder_new(const CjkVocabMap *vm, CjkDecodeMode mode);

/**
 * Feeds one id. Completed baseline ids (0, 1 or 3 of them) are written to `out[0..3]`.
 */
CjkStatus cjk_decoder_push(CjkDecoder *dec, uint32_t id, uint32_t *out, size_t *out_len);

/**
 * Ends the current sequence and resets the decoder for the next one.
 * `decode_errors` (optional) receives the lenient-mode error count for the sequence.
 */
CjkStatus cjk_decoder_finish(CjkDecoder *dec, size_t *decode_errors);

void cjk_decoder_free(CjkDecoder *dec);

CjkStatus cjk_relative_gain(uint64_t control_len, uint64_t experimental_len, double *out);

CjkStatus cjk_perceived_tps(double tps, double gain, double *out);

/**
 * Rényi entropy in nats of the distribution given by `counts[0..len]`.
 */
CjkStatus cjk_renyi_entropy(const uint64_t *counts, size_t len, double alpha, double *out);

/**
 * Rényi entropy divided by `ln(vocab_size)`.
 */
CjkStatus cjk_renyi_efficiency(const uint64_t *counts,
                               size_t len,
                               size_t vocab_size,
                               double alpha,
                               double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CJKPACK_H */
