/* Copyright 2026 The ABA Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ABA_C_API_H_
#define ABA_C_API_H_

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define ABA_EXPORT __attribute__((visibility("default")))
#else
#define ABA_EXPORT
#endif

/* Status codes. The non-zero values match the CLI exit codes. */
typedef enum {
  ABA_OK = 0,
  ABA_ERR_USAGE = 1,
  ABA_ERR_VALIDATION = 2,
  ABA_ERR_RUNTIME = 3,
} aba_status;

/* A workspace directory holding datasets, models, scenario files and runs. */
typedef struct aba_runtime aba_runtime;

/* A live rollout behind the HTTP/WebSocket control service. */
typedef struct aba_server aba_server;

ABA_EXPORT const char* aba_version(void);

/* Message of the last failed call on this thread, "" after a success. */
ABA_EXPORT const char* aba_last_error(void);

/* Strings returned through char** out-parameters are NUL-terminated JSON
 * documents owned by the caller. */
ABA_EXPORT void aba_string_free(char* s);

ABA_EXPORT aba_status aba_runtime_open(const char* workspace, aba_runtime** out);
ABA_EXPORT void aba_runtime_close(aba_runtime* rt);

/* demos_per_mode <= 0 selects the task default.
 * -> {"path", "trajectories", "pairs", "config_hash"} */
ABA_EXPORT aba_status aba_gen_data(aba_runtime* rt, const char* task, int demos_per_mode,
                                   uint64_t seed, char** out_json);

/* -> {"path", "pairs", "dimension", "tau_w"} */
ABA_EXPORT aba_status aba_fit(aba_runtime* rt, const char* task, char** out_json);

/* -> {"path", "threshold", "held_out", "percentile"} */
ABA_EXPORT aba_status aba_calibrate(aba_runtime* rt, const char* task, double percentile,
                                    char** out_json);

/* Scenario names: every environment id and every "scenario/object"
 * condition of the workspace suites. The expert must be "scripted".
 * -> the rollout record */
ABA_EXPORT aba_status aba_rollout(aba_runtime* rt, const char* scenario, const char* method,
                                  const char* expert, uint64_t seed, char** out_json);

/* methods: comma-separated list, NULL or "" for all four.
 * -> {"bench_id", "run_dir", "report"} where report is the text table */
ABA_EXPORT aba_status aba_bench(aba_runtime* rt, const char* task, const char* methods,
                                int rollouts, uint64_t seed, char** out_json);

/* Rebuilds the report files from the records under runs_dir.
 * -> {"dir", "report"} */
ABA_EXPORT aba_status aba_analyze(const char* runs_dir, char** out_json);

/* Starts one interactive rollout and its control service on
 * address:port (port 0 picks a free one). */
ABA_EXPORT aba_status aba_server_start(aba_runtime* rt, const char* scenario,
                                       const char* method, uint64_t seed,
                                       const char* address, int port, int start_paused,
                                       aba_server** out);
ABA_EXPORT int aba_server_port(const aba_server* server);

/* Waits up to timeout_ms for the rollout to end; *finished is set to 0 or 1. */
ABA_EXPORT aba_status aba_server_wait(aba_server* server, int timeout_ms, int* finished);

/* The finished rollout's record. ABA_ERR_VALIDATION while it still runs. */
ABA_EXPORT aba_status aba_server_result(aba_server* server, char** out_json);

/* Aborts a pending expert query, stops the service and frees the handle. */
ABA_EXPORT void aba_server_stop(aba_server* server);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* ABA_C_API_H_ */
