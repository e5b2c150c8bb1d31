/* Copyright 2026 the mwsmf authors. Apache-2.0 license. */
/*
 * C interface to the mediation framework simulator. All types are opaque
 * handles; every fallible call returns a status code and leaves a
 * human-readable message in mwsmf_last_error() on failure. Strings
 * returned from handle accessors stay owned by the handle; strings
 * returned through out-parameters are freed with mwsmf_string_free().
 */
#ifndef MWSMF_H
#define MWSMF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MWSMF_API __declspec(dllexport)
#else
#define MWSMF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* A completed scenario run. */
typedef struct mwsmf_run mwsmf_run;

enum {
  MWSMF_OK = 0,
  MWSMF_ERR_ARGUMENT = 1,   /* null or malformed argument */
  MWSMF_ERR_SCENARIO = 2,   /* scenario invalid, or assembly failed */
  MWSMF_ERR_NO_DATA = 3,    /* empty metric log */
  MWSMF_ERR_IO = 4,         /* file could not be read or written */
  MWSMF_ERR_INTERNAL = 5    /* anything else; see mwsmf_last_error() */
};

MWSMF_API const char* mwsmf_version(void);

/* Message for the calling thread's most recent failure; "" when none. */
MWSMF_API const char* mwsmf_last_error(void);

/* Parses and cross-validates a scenario file without running it. */
MWSMF_API int mwsmf_scenario_check(const char* scenario_path);

/*
 * Runs a scenario to network quiescence. The same (scenario, seed) pair
 * always produces byte-identical metrics, report and trace text. Pass
 * capture_trace=0 to skip trace retention. On MWSMF_OK the caller owns
 * *out and releases it with mwsmf_run_free().
 */
MWSMF_API int mwsmf_run_scenario(const char* scenario_path, uint64_t seed,
                                 int capture_trace, mwsmf_run** out);
MWSMF_API void mwsmf_run_free(mwsmf_run* run);

/* 0 = every workload expectation met, 2 = at least one missed. */
MWSMF_API int mwsmf_run_exit_code(const mwsmf_run* run);

/* One tab-separated line per invocation, trailing newline. */
MWSMF_API const char* mwsmf_run_metrics(const mwsmf_run* run);
/* Aggregate key<TAB>value report over all invocations. */
MWSMF_API const char* mwsmf_run_report(const mwsmf_run* run);
/* time<TAB>event<TAB>fields log; "" unless capture_trace was set. */
MWSMF_API const char* mwsmf_run_trace(const mwsmf_run* run);
/* Mediator-side log: one tab-separated line per handled message. */
MWSMF_API const char* mwsmf_run_mediation_log(const mwsmf_run* run);

MWSMF_API size_t mwsmf_run_invocations(const mwsmf_run* run);
/* Per-invocation outcome: message id, observed status, expected status. */
MWSMF_API const char* mwsmf_run_invocation_id(const mwsmf_run* run, size_t i);
MWSMF_API const char* mwsmf_run_invocation_status(const mwsmf_run* run,
                                                  size_t i);
MWSMF_API const char* mwsmf_run_invocation_expected(const mwsmf_run* run,
                                                    size_t i);
MWSMF_API int mwsmf_run_invocation_matched(const mwsmf_run* run, size_t i);

MWSMF_API uint64_t mwsmf_run_messages_sent(const mwsmf_run* run);
MWSMF_API uint64_t mwsmf_run_messages_delivered(const mwsmf_run* run);
MWSMF_API uint64_t mwsmf_run_messages_failed(const mwsmf_run* run);

/*
 * Recomputes the aggregate report from a previously written metric log.
 * On MWSMF_OK, *out_text is malloc-owned; free with mwsmf_string_free().
 */
MWSMF_API int mwsmf_report_from_file(const char* metrics_path,
                                     char** out_text);
MWSMF_API void mwsmf_string_free(char* text);

/*
 * Generates an RSA keypair for an identity: <dir>/<identity>.der
 * (DER private key) and <dir>/<identity>.pub.der (SubjectPublicKeyInfo).
 * bits must be 1024 or 2048.
 */
MWSMF_API int mwsmf_keystore_generate(const char* dir, const char* identity,
                                      int bits);

#ifdef __cplusplus
}
#endif

#endif /* MWSMF_H */
