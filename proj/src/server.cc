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

#include "aba/server.h"

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <utility>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "aba/error.h"

namespace aba {
namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

constexpr auto kPollInterval = std::chrono::milliseconds(100);

HttpReply Reject(int status, const std::string& kind, const std::string& message) {
  return {status, json{{"error", kind}, {"message", message}}.dump()};
}

// Accepts a raw body or a JSON object carrying `field`.
std::string BodyText(const std::string& body, const std::string& field) {
  const size_t first = body.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && body[first] == '{') {
    const json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains(field) || !j[field].is_string()) {
      throw ValidationError("expected a JSON object with a string field '" + field + "'");
    }
    return j[field].get<std::string>();
  }
  const size_t last = body.find_last_not_of(" \t\r\n");
  return first == std::string::npos ? "" : body.substr(first, last - first + 1);
}

}  // namespace

HttpReply HandleHttp(LiveSession& session, const std::string& method, const std::string& target,
                     const std::string& body) {
  const std::string path = target.substr(0, target.find('?'));
  if (path == "/state") {
    if (method != "GET") return Reject(405, "method", "use GET /state");
    return {200, session.Snapshot()->dump()};
  }
  if (path == "/feedback") {
    if (method != "POST") return Reject(405, "method", "use POST /feedback");
    try {
      session.SubmitFeedback(BodyText(body, "text"));
    } catch (const ParseError& e) {
      return {400, json{{"error", "parse"}, {"message", e.what()}, {"position", e.position()}}
                       .dump()};
    } catch (const ValidationError& e) {
      return Reject(409, "state", e.what());
    }
    return {200, json{{"accepted", true}, {"version", session.version()}}.dump()};
  }
  if (path == "/control") {
    if (method != "POST") return Reject(405, "method", "use POST /control");
    ControlCommand command;
    try {
      command = ParseControlCommand(BodyText(body, "command"));
    } catch (const ValidationError& e) {
      return Reject(400, "command", e.what());
    }
    try {
      session.Control(command);
    } catch (const ValidationError& e) {
      return Reject(409, "state", e.what());
    }
    return {200, json{{"status", (*session.Snapshot())["status"]},
                      {"version", session.version()}}.dump()};
  }
  return Reject(404, "route", "no route for " + path);
}

struct ControlServer::Impl {
  net::io_context io;
  tcp::acceptor acceptor{io};
};

ControlServer::ControlServer(LiveSession& session, std::string address, int port)
    : session_(session), address_(std::move(address)), port_(port),
      impl_(std::make_unique<Impl>()) {}

ControlServer::~ControlServer() { Stop(); }

void ControlServer::Start() {
  try {
    const tcp::endpoint endpoint(net::ip::make_address(address_),
                                 static_cast<unsigned short>(port_));
    impl_->acceptor.open(endpoint.protocol());
    impl_->acceptor.set_option(net::socket_base::reuse_address(true));
    impl_->acceptor.bind(endpoint);
    impl_->acceptor.listen();
    port_ = impl_->acceptor.local_endpoint().port();
  } catch (const boost::system::system_error& e) {
    throw RuntimeFailure("cannot listen on " + address_ + ":" + std::to_string(port_) + ": " +
                         e.what());
  }
  acceptor_thread_ = std::thread([this] { AcceptLoop(); });
}

void ControlServer::Stop() {
  if (stopping_.exchange(true)) return;
  if (acceptor_thread_.joinable()) acceptor_thread_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (std::thread& t : workers) t.join();
  beast::error_code ec;
  impl_->acceptor.close(ec);
}

void ControlServer::AcceptLoop() {
  const int listen_fd = impl_->acceptor.native_handle();
  while (!stopping_) {
    pollfd p{listen_fd, POLLIN, 0};
    if (::poll(&p, 1, static_cast<int>(kPollInterval.count())) <= 0) continue;
    tcp::socket socket(impl_->io);
    beast::error_code ec;
    impl_->acceptor.accept(socket, ec);
    if (ec) continue;
    const int fd = socket.release(ec);
    if (ec) continue;
    std::lock_guard<std::mutex> lock(mu_);
    open_fds_.insert(fd);
    workers_.emplace_back([this, fd] { Serve(fd); });
  }
}

void ControlServer::Untrack(int fd) {
  std::lock_guard<std::mutex> lock(mu_);
  open_fds_.erase(fd);
}

void ControlServer::Serve(int fd) {
  net::io_context io;
  tcp::socket socket(io);
  beast::error_code ec;
  socket.assign(tcp::v4(), fd, ec);
  if (ec) {
    Untrack(fd);
    ::close(fd);
    return;
  }
  beast::flat_buffer buffer;
  while (!stopping_) {
    http::request<http::string_body> req;
    http::read(socket, buffer, req, ec);
    if (ec) break;

    if (websocket::is_upgrade(req)) {
      if (req.target() != "/ws/state") {
        http::response<http::string_body> res{http::status::not_found, req.version()};
        res.set(http::field::content_type, "application/json");
        res.body() = Reject(404, "route", "websocket endpoint is /ws/state").body;
        res.prepare_payload();
        http::write(socket, res, ec);
        break;
      }
      websocket::stream<tcp::socket> ws(std::move(socket));
      ws.accept(req, ec);
      if (ec) break;
      ws.text(true);
      std::uint64_t sent = 0;
      beast::flat_buffer incoming;
      while (!stopping_) {
        // client messages are discarded; a close frame ends the stream
        pollfd p{fd, POLLIN, 0};
        if (::poll(&p, 1, 0) > 0) {
          ws.read(incoming, ec);
          if (ec) break;
          incoming.clear();
        }
        const auto snapshot = session_.WaitForSnapshot(sent, kPollInterval);
        const std::uint64_t version = (*snapshot)["version"].get<std::uint64_t>();
        if (version <= sent) continue;
        ws.write(net::buffer(snapshot->dump()), ec);
        if (ec) break;
        sent = version;
      }
      ws.close(websocket::close_code::normal, ec);
      Untrack(fd);
      return;
    }

    const HttpReply reply =
        HandleHttp(session_, std::string(req.method_string()), std::string(req.target()),
                   req.body());
    http::response<http::string_body> res{static_cast<http::status>(reply.status),
                                          req.version()};
    res.set(http::field::content_type, "application/json");
    res.set(http::field::access_control_allow_origin, "*");
    res.keep_alive(req.keep_alive());
    res.body() = reply.body;
    res.prepare_payload();
    http::write(socket, res, ec);
    if (ec || !res.keep_alive()) break;
  }
  Untrack(fd);
  socket.shutdown(tcp::socket::shutdown_both, ec);
  socket.close(ec);
}

}  // namespace aba
