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

// Command-line front end. Talks to the library through the C API only.

#include <signal.h>
#include <time.h>

#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aba/c_api.h"

namespace {

using nlohmann::json;

constexpr int kUsage = 1;

// Thrown by Check; carries an aba_status as the exit code.
struct Failure {
  int code;
};

void Check(aba_status status) {
  if (status == ABA_OK) return;
  std::cerr << "error: " << aba_last_error() << "\n";
  throw Failure{static_cast<int>(status)};
}

json TakeJson(char* text) {
  std::unique_ptr<char, decltype(&aba_string_free)> owned(text, &aba_string_free);
  return json::parse(text);
}

using Runtime = std::unique_ptr<aba_runtime, decltype(&aba_runtime_close)>;

Runtime Open(const std::string& workspace) {
  aba_runtime* rt = nullptr;
  Check(aba_runtime_open(workspace.c_str(), &rt));
  return Runtime(rt, &aba_runtime_close);
}

std::string SubgoalSummary(const json& record) {
  std::string out;
  for (const json& s : record.at("subgoals")) {
    // [name, achieved]
    out += (out.empty() ? "" : " ") + s.at(0).get<std::string>() +
           (s.at(1).get<bool>() ? "+" : "-");
  }
  return out;
}

void PrintRecordSummary(const json& r, bool full) {
  if (full) {
    std::cout << r.dump() << "\n";
    return;
  }
  std::cout << r.at("condition").get<std::string>() << " " << r.at("method").get<std::string>()
            << " seed " << r.at("seed").get<std::uint64_t>() << ": "
            << (r.at("success").get<bool>() ? "success" : "failure") << " ["
            << SubgoalSummary(r) << "], feedback " << r.at("feedback_total").get<int>();
  if (r.at("incomplete").get<bool>()) std::cout << ", incomplete";
  const std::string error = r.at("error").get<std::string>();
  if (!error.empty()) std::cout << ", error: " << error;
  std::cout << "\n";
}

// Runs one interactive rollout behind the control service until it ends or
// SIGINT/SIGTERM arrives. With keep_serving the service outlives the rollout.
int ServeLoop(aba_runtime* rt, const std::string& scenario, const std::string& method,
              std::uint64_t seed, const std::string& address, int port, bool start_paused,
              bool keep_serving, bool full_record) {
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  aba_server* server = nullptr;
  Check(aba_server_start(rt, scenario.c_str(), method.c_str(), seed, address.c_str(), port,
                         start_paused ? 1 : 0, &server));
  std::unique_ptr<aba_server, decltype(&aba_server_stop)> guard(server, &aba_server_stop);
  std::cerr << "serving " << scenario << " (" << method << ", seed " << seed << ") on http://"
            << address << ":" << aba_server_port(server)
            << "  [GET /state, POST /feedback, POST /control, WS /ws/state]\n";

  bool reported = false;
  for (;;) {
    int finished = 0;
    Check(aba_server_wait(server, 0, &finished));
    if (finished && !reported) {
      char* out = nullptr;
      const aba_status status = aba_server_result(server, &out);
      if (status == ABA_OK) {
        PrintRecordSummary(TakeJson(out), full_record);
      } else {
        std::cerr << "error: " << aba_last_error() << "\n";
        if (!keep_serving) return status;
      }
      reported = true;
      std::cout.flush();
      if (!keep_serving) return 0;
    }
    timespec wait{0, 200 * 1000 * 1000};
    if (sigtimedwait(&stop_signals, nullptr, &wait) > 0) {
      std::cerr << "stopping\n";
      return 0;
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  signal(SIGPIPE, SIG_IGN);

  CLI::App app{"Test-time adaptation of imitation policies through expert-guided "
               "observation retrieval"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(aba_version()));
  std::string workspace = ".";
  app.add_option("-w,--workspace", workspace,
                 "Directory holding scenarios/, datasets/, models/ and runs/")
      ->capture_default_str();

  std::string task;
  std::uint64_t seed = 0;

  auto* gen = app.add_subcommand("gen-data", "Generate a demonstration dataset");
  int demos_per_mode = 0;
  gen->add_option("--task", task, "sweep-sort or place-in-cup")->required();
  gen->add_option("--demos-per-mode", demos_per_mode,
                  "Trajectories per ID mode (default 50 for sweep-sort, 100 for place-in-cup)");
  gen->add_option("--seed", seed, "Generator seed")->capture_default_str();

  auto* fit = app.add_subcommand("fit", "Fit the policy on a generated dataset");
  fit->add_option("--task", task, "sweep-sort or place-in-cup")->required();

  auto* calibrate = app.add_subcommand("calibrate", "Calibrate the OOD threshold");
  double percentile = 0.02;
  std::vector<std::string> calibrate_tasks;
  calibrate->add_option("--percentile", percentile, "Target false-OOD fraction in (0, 1)")
      ->capture_default_str();
  calibrate->add_option("--task", calibrate_tasks, "Tasks to calibrate (default: both)");

  auto* rollout = app.add_subcommand("rollout", "Run one rollout");
  std::string scenario;
  std::string method = "aba";
  std::string expert = "scripted";
  int port = 8765;
  std::string address = "127.0.0.1";
  bool start_paused = false;
  bool full_record = false;
  rollout->add_option("--scenario", scenario, "Scenario or scenario/object condition")
      ->required();
  rollout->add_option("--method", method, "vanilla, policy-embed, visual-embed or aba")
      ->capture_default_str();
  rollout->add_option("--expert", expert, "Expert kind")
      ->check(CLI::IsMember({"scripted", "interactive"}))
      ->capture_default_str();
  rollout->add_option("--seed", seed, "Rollout seed")->capture_default_str();
  rollout->add_option("--port", port, "Control service port for the interactive expert")
      ->capture_default_str();
  rollout->add_option("--address", address, "Control service bind address")
      ->capture_default_str();
  rollout->add_flag("--start-paused", start_paused, "Hold the rollout until resumed");
  rollout->add_flag("--json", full_record, "Print the full rollout record");

  auto* bench = app.add_subcommand("bench", "Run the benchmark matrix");
  std::string methods;
  int rollouts = 10;
  bench->add_option("--task", task, "sweep-sort or place-in-cup")->required();
  bench->add_option("--methods", methods, "Comma-separated methods (default: all four)");
  bench->add_option("--rollouts", rollouts, "Rollouts per condition and method")
      ->capture_default_str();
  bench->add_option("--seed", seed, "Benchmark seed")->capture_default_str();

  auto* analyze = app.add_subcommand("analyze", "Rebuild reports from persisted records");
  std::string runs;
  analyze->add_option("--runs", runs, "Run directory or a directory of runs")->required();

  auto* serve = app.add_subcommand("serve", "Serve an interactive rollout for the console");
  std::string serve_scenario = "place-pencil";
  bool exit_when_done = false;
  serve->add_option("--port", port, "Listen port (0 picks a free one)")->capture_default_str();
  serve->add_option("--address", address, "Bind address")->capture_default_str();
  serve->add_option("--scenario", serve_scenario, "Scenario or scenario/object condition")
      ->capture_default_str();
  serve->add_option("--method", method, "vanilla, policy-embed, visual-embed or aba")
      ->capture_default_str();
  serve->add_option("--seed", seed, "Rollout seed")->capture_default_str();
  serve->add_flag("--start-paused", start_paused, "Hold the rollout until resumed");
  serve->add_flag("--exit-when-done", exit_when_done, "Exit once the rollout ends");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen) {
      Runtime rt = Open(workspace);
      char* out = nullptr;
      Check(aba_gen_data(rt.get(), task.c_str(), demos_per_mode, seed, &out));
      const json r = TakeJson(out);
      std::cout << "wrote " << r["path"].get<std::string>() << ": " << r["trajectories"]
                << " trajectories, " << r["pairs"] << " pairs, config "
                << r["config_hash"].get<std::string>() << "\n";
    } else if (*fit) {
      Runtime rt = Open(workspace);
      char* out = nullptr;
      Check(aba_fit(rt.get(), task.c_str(), &out));
      const json r = TakeJson(out);
      std::cout << "wrote " << r["path"].get<std::string>() << ": " << r["pairs"]
                << " pairs, dimension " << r["dimension"] << ", tau_w " << r["tau_w"] << "\n";
    } else if (*calibrate) {
      Runtime rt = Open(workspace);
      if (calibrate_tasks.empty()) calibrate_tasks = {"sweep-sort", "place-in-cup"};
      for (const std::string& t : calibrate_tasks) {
        char* out = nullptr;
        Check(aba_calibrate(rt.get(), t.c_str(), percentile, &out));
        const json r = TakeJson(out);
        std::cout << "wrote " << r["path"].get<std::string>() << ": threshold "
                  << r["threshold"] << " from " << r["held_out"] << " held-out observations\n";
      }
    } else if (*rollout) {
      Runtime rt = Open(workspace);
      if (expert == "interactive") {
        return ServeLoop(rt.get(), scenario, method, seed, address, port, start_paused,
                         /*keep_serving=*/false, full_record);
      }
      char* out = nullptr;
      Check(aba_rollout(rt.get(), scenario.c_str(), method.c_str(), expert.c_str(), seed, &out));
      PrintRecordSummary(TakeJson(out), full_record);
    } else if (*bench) {
      Runtime rt = Open(workspace);
      char* out = nullptr;
      Check(aba_bench(rt.get(), task.c_str(), methods.c_str(), rollouts, seed, &out));
      const json r = TakeJson(out);
      std::cout << r["report"].get<std::string>();
      std::cout << "records and reports in " << r["run_dir"].get<std::string>() << "\n";
    } else if (*analyze) {
      char* out = nullptr;
      Check(aba_analyze(runs.c_str(), &out));
      std::cout << TakeJson(out)["report"].get<std::string>();
    } else if (*serve) {
      Runtime rt = Open(workspace);
      return ServeLoop(rt.get(), serve_scenario, method, seed, address, port, start_paused,
                       !exit_when_done, /*full_record=*/false);
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
