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

#ifndef ABA_SERVER_H_
#define ABA_SERVER_H_

#include <atomic>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "aba/live_session.h"

namespace aba {

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
};

// Routes one plain HTTP request:
//   GET  /state     current snapshot
//   POST /feedback  feature-grammar text, raw or as {"text": ...}
//   POST /control   pause|resume|step, raw or as {"command": ...}
// Rejections carry {"error": kind, "message": ...} and leave the session
// untouched.
HttpReply HandleHttp(LiveSession& session, const std::string& method, const std::string& target,
                     const std::string& body);

// HTTP + WebSocket front end for a LiveSession. WebSocket clients on
// /ws/state receive every snapshot as a text frame, newest first on connect.
class ControlServer {
 public:
  // port 0 picks a free port.
  ControlServer(LiveSession& session, std::string address, int port);
  ~ControlServer();

  ControlServer(const ControlServer&) = delete;
  ControlServer& operator=(const ControlServer&) = delete;

  void Start();  // throws RuntimeFailure when the address cannot be bound
  void Stop();   // closes every connection and joins all threads
  int port() const { return port_; }

 private:
  struct Impl;

  void AcceptLoop();
  void Serve(int fd);
  void Untrack(int fd);

  LiveSession& session_;
  std::string address_;
  int port_;
  std::unique_ptr<Impl> impl_;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_thread_;
  std::mutex mu_;
  std::vector<std::thread> workers_;
  std::set<int> open_fds_;
};

}  // namespace aba

#endif  // ABA_SERVER_H_
