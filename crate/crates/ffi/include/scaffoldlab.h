#ifndef SCAFFOLDLAB_H
#define SCAFFOLDLAB_H

#include <stdbool.h>
#include <stdint.h>

// Status codes. The nonzero error codes 1 to 3 match the CLI exit codes.
typedef enum SlStatus {
  SL_STATUS_OK = 0,
  // Configuration, syntax or i/o error.
  SL_STATUS_CONFIG = 1,
  // Series precision ran out after all retries.
  SL_STATUS_PRECISION = 2,
  // An identity that must hold failed.
  SL_STATUS_CONTRACT = 3,
  // Null pointer or non-UTF-8 string argument.
  SL_STATUS_INVALID_ARGUMENT = 4,
  // The library panicked; the handle arguments are left untouched.
  SL_STATUS_PANIC = 5,
} SlStatus;

typedef enum SlFormat {
  SL_FORMAT_JSON = 0,
  SL_FORMAT_TEXT = 1,
} SlFormat;

// A validated case configuration.
typedef struct SlCase SlCase;

// The result of analyzing a case.
typedef struct SlReport SlReport;

// Parses and validates a JSON case configuration.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum SlStatus sl_case_parse(const char *json, struct SlCase **out);

// Reads, parses and validates a case file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum SlStatus sl_case_load(const char *path, struct SlCase **out);

// # Safety
// `case` must be null or a handle from `sl_case_parse`/`sl_case_load` not yet freed.
void sl_case_free(struct SlCase *case_);

// Runs the full pipeline on a case.
//
// # Safety
// `case` must be a live case handle and `out` a valid pointer.
enum SlStatus sl_analyze(const struct SlCase *case_, struct SlReport **out);

// Renders a report. The string is owned by the caller; free it with `sl_string_free`.
//
// # Safety
// `report` must be a live report handle and `out` a valid pointer.
enum SlStatus sl_report_render(const struct SlReport *report, enum SlFormat format, char **out);

// Whether the case met every assumption. False for a null handle.
//
// # Safety
// `report` must be null or a live report handle.
bool sl_report_eligible(const struct SlReport *report);

// Writes the lower breaks into `out` (capacity `len`) and returns how many
// there are; the caller retries with a larger buffer if that exceeds `len`.
//
// # Safety
// `report` must be null or a live report handle; `out` must hold `len` values or be null when `len` is 0.
uintptr_t sl_report_lower_breaks(const struct SlReport *report,
                                 int64_t *out,
                                 uintptr_t len);

// 1 when the scaffold verified, 0 when it failed, -1 when it was not run.
//
// # Safety
// `report` must be null or a live report handle.
int32_t sl_report_scaffold_valid(const struct SlReport *report);

// # Safety
// `report` must be null or a handle from `sl_analyze` not yet freed.
void sl_report_free(struct SlReport *report);

// # Safety
// `s` must be null or a string returned by this library not yet freed.
void sl_string_free(char *s);

// Message of the last failed call on this thread, or null. Valid until the
// next call into the library on the same thread.
const char *sl_last_error(void);

const char *sl_version(void);

#endif  /* SCAFFOLDLAB_H */
