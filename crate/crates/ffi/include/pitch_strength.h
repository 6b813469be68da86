#ifndef PITCH_STRENGTH_H
#define PITCH_STRENGTH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum PsStatus {
  PS_STATUS_OK = 0,
  // A required pointer argument was null.
  PS_STATUS_NULL_POINTER = 1,
  // An argument was out of range or inconsistent.
  PS_STATUS_INVALID_ARGUMENT = 2,
  // A file or document could not be read, written or parsed.
  PS_STATUS_INPUT_FORMAT = 3,
  // The computation itself failed (too few points, degenerate data).
  PS_STATUS_NUMERICAL = 4,
  // A string argument was not valid UTF-8.
  PS_STATUS_INVALID_UTF8 = 5,
  // An internal panic was caught at the boundary.
  PS_STATUS_INTERNAL = 6,
} PsStatus;

// Mono audio buffer.
typedef struct PsAudioBuffer PsAudioBuffer;

// Fitted noisiness-inharmonicity space.
typedef struct PsSpaceModel PsSpaceModel;

// Median raw features of one buffer.
typedef struct PsFeatures {
  double harmonic_ratio;
  double flatness;
  // Buffer had no energy; the values above are placeholders.
  bool degenerate;
} PsFeatures;

// A feature vector placed in a fitted space.
typedef struct PsSpacePoint {
  double noisiness_norm;
  double inharmonicity_norm;
  double pc1;
  double pc2;
} PsSpacePoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `cap`). Returns the full message length excluding the NUL, or
// 0 when there is no error. `buf` may be null to query the length.
//
// # Safety
// `buf` must be null or point to `cap` writable bytes.
size_t ps_last_error_message(char *buf, size_t cap);

// Library version as a static NUL-terminated string.
const char *ps_version(void);

// Wraps `len` samples at `sample_rate_hz` in a new buffer.
//
// # Safety
// `samples` must point to `len` readable doubles; `out` must be writable.
enum PsStatus ps_audio_from_samples(const double *samples,
                                    size_t len,
                                    uint32_t sample_rate_hz,
                                    struct PsAudioBuffer **out);

// Reads a WAV file, down-mixing to mono.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum PsStatus ps_audio_load(const char *path, struct PsAudioBuffer **out);

// Writes a WAV file at 16, 24 or 32 (float) bits. The number of samples
// hard-clipped to [-1, 1] goes to `clipped` when it is not null.
//
// # Safety
// `buffer` must be a live handle, `path` a NUL-terminated string and
// `clipped` null or writable.
enum PsStatus ps_audio_save(const struct PsAudioBuffer *buffer,
                            const char *path,
                            uint32_t bits,
                            size_t *clipped);

// Number of samples, or 0 for a null handle.
//
// # Safety
// `buffer` must be null or a live handle.
size_t ps_audio_len(const struct PsAudioBuffer *buffer);

// Sample rate in Hz, or 0 for a null handle.
//
// # Safety
// `buffer` must be null or a live handle.
uint32_t ps_audio_sample_rate(const struct PsAudioBuffer *buffer);

// Copies up to `cap` samples into `dst`; returns how many were copied.
//
// # Safety
// `buffer` must be null or a live handle; `dst` must hold `cap` doubles.
size_t ps_audio_copy_samples(const struct PsAudioBuffer *buffer, double *dst, size_t cap);

// Releases a buffer. Null is ignored.
//
// # Safety
// `buffer` must be null or a handle not yet freed.
void ps_audio_free(struct PsAudioBuffer *buffer);

// Reference sound `sound_id` (1 strongest pitch .. 11 weakest).
//
// # Safety
// `out` must be writable.
enum PsStatus ps_synth_reference(uint8_t sound_id,
                                 uint32_t center_freq_hz,
                                 double duration_s,
                                 uint32_t sample_rate_hz,
                                 uint64_t seed,
                                 struct PsAudioBuffer **out);

// Iterated rippled noise with pitch at `1 / delay_s`.
//
// # Safety
// `out` must be writable.
enum PsStatus ps_synth_irn(double delay_s,
                           double gain,
                           uint32_t iterations,
                           double duration_s,
                           uint32_t sample_rate_hz,
                           uint64_t seed,
                           struct PsAudioBuffer **out);

// Harmonic tone whose k-th partial has amplitude `s^(k-1)`.
//
// # Safety
// `out` must be writable.
enum PsStatus ps_synth_mauch(double f0_hz,
                             double s,
                             uint32_t n_harmonics,
                             double duration_s,
                             uint32_t sample_rate_hz,
                             struct PsAudioBuffer **out);

// HarmonicRatio of one frame with the default 25-2000 Hz pitch range.
//
// # Safety
// `frame` must point to `len` doubles; `out_value` must be writable.
enum PsStatus ps_harmonic_ratio(const double *frame,
                                size_t len,
                                uint32_t sample_rate_hz,
                                double *out_value);

// Median HarmonicRatio and flatness of a whole buffer (default analysis).
//
// # Safety
// `buffer` must be a live handle; `out` must be writable.
enum PsStatus ps_buffer_features(const struct PsAudioBuffer *buffer, struct PsFeatures *out);

// HR-inharmonicity `(1 - hr)^0.21`.
//
// # Safety
// `out` must be writable.
enum PsStatus ps_normalize_inharmonicity(double hr, double *out);

// Pitch-strength estimate `k * 10^ac1`.
//
// # Safety
// `out` must be writable.
enum PsStatus ps_pitch_strength(double ac1, double k, double *out);

// Salience equalizer with default settings and `gain` in [-1, 1].
//
// # Safety
// `buffer` must be a live handle; `out` must be writable.
enum PsStatus ps_salience_eq(const struct PsAudioBuffer *buffer,
                             double gain,
                             struct PsAudioBuffer **out);

// Loads a space model saved as JSON.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum PsStatus ps_model_load(const char *path, struct PsSpaceModel **out);

// Parses a space model from a JSON string.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum PsStatus ps_model_from_json(const char *json, struct PsSpaceModel **out);

// Fits a model on `n` raw (harmonic_ratio, flatness) pairs.
//
// # Safety
// `harmonic_ratio` and `flatness` must each point to `n` doubles; `out`
// must be writable.
enum PsStatus ps_model_fit(const double *harmonic_ratio,
                           const double *flatness,
                           size_t n,
                           struct PsSpaceModel **out);

// Serializes a model; free the result with [`ps_string_free`].
//
// # Safety
// `model` must be a live handle.
char *ps_model_to_json(const struct PsSpaceModel *model);

// Places raw features in the model's space.
//
// # Safety
// `model` must be a live handle; `out` must be writable.
enum PsStatus ps_model_project(const struct PsSpaceModel *model,
                               double harmonic_ratio,
                               double flatness,
                               struct PsSpacePoint *out);

// Releases a model. Null is ignored.
//
// # Safety
// `model` must be null or a handle not yet freed.
void ps_model_free(struct PsSpaceModel *model);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void ps_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PITCH_STRENGTH_H */
