// Copyright 2026 The ABA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "aba/c_api.h"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <sstream>
#include <string>
#include <thread>

#include <json.hpp>

#include "aba/bench.h"
#include "aba/error.h"
#include "aba/live_session.h"
#include "aba/server.h"

using nlohmann::json;

struct aba_runtime {
  explicit aba_runtime(std::string root) : ws(std::move(root)) {}

  aba::Workspace ws;
  std::mutex mu;
  std::map<aba::Task, aba::RuntimeModels> models;
};

struct aba_server {
  std::unique_ptr<aba::LiveSession> session;
  std::unique_ptr<aba::ControlServer> server;
  std::thread runner;
};

namespace {

thread_local std::string last_error;

aba_status Fail(aba::ErrorKind kind, const std::string& message) {
  last_error = message;
  return static_cast<aba_status>(kind);
}

template <typename F>
aba_status Guard(F&& body) {
  try {
    body();
    last_error.clear();
    return ABA_OK;
  } catch (const aba::Error& e) {
    return Fail(e.kind(), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(aba::ErrorKind::kRuntime, "out of memory");
  } catch (const std::exception& e) {
    return Fail(aba::ErrorKind::kRuntime, e.what());
  }
}

void Require(bool ok, const char* what) {
  if (!ok) throw aba::UsageError(std::string(what) + " must not be null");
}

void Emit(const json& j, char** out) {
  const std::string text = j.dump();
  char* buf = static_cast<char*>(std::malloc(text.size() + 1));
  if (buf == nullptr) throw std::bad_alloc();
  std::memcpy(buf, text.c_str(), text.size() + 1);
  *out = buf;
}

aba::RuntimeModels Models(aba_runtime* rt, aba::Task task) {
  std::lock_guard<std::mutex> lock(rt->mu);
  auto it = rt->models.find(task);
  if (it == rt->models.end()) it = rt->models.emplace(task, aba::LoadModels(rt->ws, task)).first;
  return it->second;
}

void Invalidate(aba_runtime* rt, aba::Task task) {
  std::lock_guard<std::mutex> lock(rt->mu);
  rt->models.erase(task);
}

struct Resolved {
  aba::Task task;
  aba::Scenario scenario;
  int object_index = 0;
};

Resolved ResolveScenario(const aba::Workspace& ws, const std::string& name) {
  std::vector<std::string> known;
  for (aba::Task task : {aba::Task::kSweepSort, aba::Task::kPlaceInCup}) {
    const std::vector<aba::Scenario> suite = ws.Suite(task);
    for (const aba::BenchCondition& c : aba::RolloutTargets(suite)) {
      if (c.name == name || (c.object_index == 0 && c.scenario->environment_id == name)) {
        return {task, *c.scenario, c.object_index};
      }
      known.push_back(c.name);
    }
  }
  std::string list;
  for (const std::string& k : known) list += (list.empty() ? "" : ", ") + k;
  throw aba::UsageError("unknown scenario '" + name + "' (known: " + list + ")");
}

std::vector<aba::Method> ParseMethods(const char* text) {
  if (text == nullptr || *text == '\0') return aba::BenchOptions().methods;
  std::vector<aba::Method> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw aba::UsageError("empty method name in '" + std::string(text) + "'");
    out.push_back(aba::ParseMethod(item));
  }
  return out;
}

}  // namespace

extern "C" {

const char* aba_version(void) { return "1.0.0"; }

const char* aba_last_error(void) { return last_error.c_str(); }

void aba_string_free(char* s) { std::free(s); }

aba_status aba_runtime_open(const char* workspace, aba_runtime** out) {
  return Guard([&] {
    Require(workspace != nullptr, "workspace");
    Require(out != nullptr, "out");
    *out = new aba_runtime(workspace);
  });
}

void aba_runtime_close(aba_runtime* rt) { delete rt; }

aba_status aba_gen_data(aba_runtime* rt, const char* task, int demos_per_mode, uint64_t seed,
                        char** out_json) {
  return Guard([&] {
    Require(rt != nullptr && task != nullptr && out_json != nullptr, "arguments");
    const aba::Task t = aba::ParseTask(task);
    const int demos = demos_per_mode > 0 ? demos_per_mode : aba::DefaultDemosPerMode(t);
    const aba::GenDataResult r = aba::GenData(rt->ws, t, demos, seed);
    Invalidate(rt, t);
    Emit({{"path", r.path},
          {"trajectories", r.trajectories},
          {"pairs", r.pairs},
          {"config_hash", r.config_hash}},
         out_json);
  });
}

aba_status aba_fit(aba_runtime* rt, const char* task, char** out_json) {
  return Guard([&] {
    Require(rt != nullptr && task != nullptr && out_json != nullptr, "arguments");
    const aba::Task t = aba::ParseTask(task);
    const aba::FitResult r = aba::Fit(rt->ws, t);
    Invalidate(rt, t);
    Emit({{"path", r.path}, {"pairs", r.pairs}, {"dimension", r.dimension}, {"tau_w", r.tau_w}},
         out_json);
  });
}

aba_status aba_calibrate(aba_runtime* rt, const char* task, double percentile, char** out_json) {
  return Guard([&] {
    Require(rt != nullptr && task != nullptr && out_json != nullptr, "arguments");
    const aba::Task t = aba::ParseTask(task);
    const aba::CalibrateResult r = aba::CalibrateTask(rt->ws, t, percentile);
    Invalidate(rt, t);
    Emit({{"path", r.path},
          {"threshold", r.threshold},
          {"held_out", r.held_out},
          {"percentile", percentile}},
         out_json);
  });
}

aba_status aba_rollout(aba_runtime* rt, const char* scenario, const char* method,
                       const char* expert, uint64_t seed, char** out_json) {
  return Guard([&] {
    Require(rt != nullptr && scenario != nullptr && method != nullptr && expert != nullptr &&
                out_json != nullptr,
            "arguments");
    if (std::string(expert) != "scripted") {
      throw aba::UsageError("aba_rollout supports the scripted expert; use aba_server_start "
                            "for an interactive one");
    }
    aba::InterventionConfig cfg;
    cfg.method = aba::ParseMethod(method);
    const Resolved r = ResolveScenario(rt->ws, scenario);
    const aba::RuntimeModels models = Models(rt, r.task);
    aba::ScriptedExpert oracle(r.scenario.objects[r.object_index].expert_script);
    const aba::RolloutRecord record =
        aba::Rollout(r.scenario, r.object_index, models, &oracle, cfg, seed);
    Emit(aba::RecordToJson(record), out_json);
  });
}

aba_status aba_bench(aba_runtime* rt, const char* task, const char* methods, int rollouts,
                     uint64_t seed, char** out_json) {
  return Guard([&] {
    Require(rt != nullptr && task != nullptr && out_json != nullptr, "arguments");
    if (rollouts < 1) throw aba::UsageError("rollouts must be >= 1");
    const aba::Task t = aba::ParseTask(task);
    aba::BenchOptions options;
    options.methods = ParseMethods(methods);
    options.rollouts = rollouts;
    options.seed = seed;
    const aba::BenchResult r = aba::RunBench(rt->ws, t, options);
    Emit({{"bench_id", r.bench_id},
          {"run_dir", r.run_dir},
          {"report", aba::RenderReport(r.report).at("report.txt")}},
         out_json);
  });
}

aba_status aba_analyze(const char* runs_dir, char** out_json) {
  return Guard([&] {
    Require(runs_dir != nullptr && out_json != nullptr, "arguments");
    const aba::BenchReport report = aba::Analyze(runs_dir);
    Emit({{"dir", runs_dir}, {"report", aba::RenderReport(report).at("report.txt")}}, out_json);
  });
}

aba_status aba_server_start(aba_runtime* rt, const char* scenario, const char* method,
                            uint64_t seed, const char* address, int port, int start_paused,
                            aba_server** out) {
  return Guard([&] {
    Require(rt != nullptr && scenario != nullptr && method != nullptr && out != nullptr,
            "arguments");
    if (port < 0 || port > 65535) throw aba::UsageError("port out of range");
    const Resolved r = ResolveScenario(rt->ws, scenario);
    aba::LiveSession::Options options;
    options.object_index = r.object_index;
    options.intervention.method = aba::ParseMethod(method);
    options.seed = seed;
    options.start_paused = start_paused != 0;
    auto handle = std::make_unique<aba_server>();
    handle->session =
        std::make_unique<aba::LiveSession>(Models(rt, r.task), r.scenario, options);
    handle->server = std::make_unique<aba::ControlServer>(
        *handle->session, address != nullptr ? address : "127.0.0.1", port);
    handle->server->Start();
    aba_server* raw = handle.get();
    raw->runner = std::thread([raw] {
      try {
        raw->session->Run();
      } catch (const std::exception&) {
        // the session snapshot carries the message
      }
    });
    *out = handle.release();
  });
}

int aba_server_port(const aba_server* server) {
  return server != nullptr ? server->server->port() : -1;
}

aba_status aba_server_wait(aba_server* server, int timeout_ms, int* finished) {
  return Guard([&] {
    Require(server != nullptr && finished != nullptr, "arguments");
    *finished =
        server->session->WaitFinished(std::chrono::milliseconds(std::max(timeout_ms, 0))) ? 1 : 0;
  });
}

aba_status aba_server_result(aba_server* server, char** out_json) {
  return Guard([&] {
    Require(server != nullptr && out_json != nullptr, "arguments");
    if (!server->session->finished()) throw aba::ValidationError("the rollout is still running");
    const std::optional<aba::RolloutRecord> record = server->session->result();
    if (!record) {
      const json& error = (*server->session->Snapshot())["error"];
      throw aba::RuntimeFailure("rollout failed: " +
                                (error.is_string() ? error.get<std::string>() : "unknown"));
    }
    Emit(aba::RecordToJson(*record), out_json);
  });
}

void aba_server_stop(aba_server* server) {
  if (server == nullptr) return;
  server->session->Cancel();
  if (server->runner.joinable()) server->runner.join();
  server->server->Stop();
  delete server;
}

}  // extern "C"
