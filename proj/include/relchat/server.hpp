// Copyright 2026 The relchat Authors
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

#pragma once

// HTTP + WebSocket gateway.
//
//   POST /session                  -> {"session_id", "opening"}
//   POST /session/{id}/turn        {"text"} -> {"reply", "debug"}
//   GET  /session/{id}/metrics     -> session metrics
//   GET  /session/{id}/transcript  -> {"turns": [...]}
//   GET  /session/{id}/stream      WebSocket upgrade
//
// On connect the stream replays the session history as user_turn and
// system_turn frames. Each {"type":"user_turn","text":...} frame from the
// client is answered with user_turn, system_turn and debug_state frames.

#include <sys/socket.h>

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include "relchat/engine.hpp"
#include "relchat/error.hpp"

namespace relchat {

namespace beast = boost::beast;
namespace http = boost::beast::http;
namespace websocket = boost::beast::websocket;
using tcp = boost::asio::ip::tcp;

inline nlohmann::json turn_frame(const TurnRecord& t) {
  return {{"type", t.speaker == Speaker::user ? "user_turn" : "system_turn"}, {"turn", to_json(t)}};
}

inline nlohmann::json error_json(const std::string& kind, const std::string& message) {
  return {{"error", kind}, {"message", message}};
}

// Splits "/session/{id}/{action}"; false when the target does not match.
inline bool parse_session_target(std::string_view target, std::string& id, std::string& action) {
  constexpr std::string_view prefix = "/session/";
  if (target.substr(0, prefix.size()) != prefix) return false;
  auto rest = target.substr(prefix.size());
  auto q = rest.find('?');
  if (q != std::string_view::npos) rest = rest.substr(0, q);
  auto slash = rest.find('/');
  if (slash == std::string_view::npos || slash == 0) return false;
  id = std::string(rest.substr(0, slash));
  action = std::string(rest.substr(slash + 1));
  return !action.empty() && action.find('/') == std::string::npos;
}

class Gateway {
 public:
  // Port 0 binds an ephemeral port; see port().
  Gateway(Engine& engine, unsigned short port, const std::string& address = "127.0.0.1")
      : engine_(engine), acceptor_(io_, tcp::endpoint(boost::asio::ip::make_address(address), port)) {}

  ~Gateway() { stop(); }

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  void start() {
    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
  }

  // Blocks the caller; used by the CLI.
  void run() {
    running_ = true;
    accept_loop();
  }

  void stop() {
    if (!running_.exchange(false)) return;
    boost::system::error_code ec;
    ::shutdown(acceptor_.native_handle(), SHUT_RDWR);
    acceptor_.close(ec);
    if (accept_thread_.joinable()) accept_thread_.join();
    {
      std::lock_guard lock(mutex_);
      for (int fd : open_sockets_) ::shutdown(fd, SHUT_RDWR);
    }
    std::vector<std::thread> workers;
    {
      std::lock_guard lock(mutex_);
      workers.swap(workers_);
    }
    for (auto& t : workers) {
      if (t.joinable()) t.join();
    }
  }

  // Request handling without sockets; also used directly in tests.
  http::response<http::string_body> handle(const http::request<http::string_body>& req) {
    http::response<http::string_body> res;
    res.version(req.version());
    res.keep_alive(req.keep_alive());
    res.set(http::field::content_type, "application/json");
    res.set(http::field::access_control_allow_origin, "*");
    auto reply = [&](http::status status, const nlohmann::json& body) {
      res.result(status);
      res.body() = body.dump();
      res.prepare_payload();
      return res;
    };

    std::string target(req.target());
    try {
      if (req.method() == http::verb::options) return reply(http::status::no_content, nlohmann::json::object());
      if (target == "/health" && req.method() == http::verb::get) {
        return reply(http::status::ok, {{"status", "ok"}});
      }
      if (target == "/session" && req.method() == http::verb::post) {
        std::string id = engine_.create_session();
        return reply(http::status::ok, {{"session_id", id}, {"opening", engine_.transcript(id).front().text}});
      }
      std::string id;
      std::string action;
      if (!parse_session_target(target, id, action)) {
        return reply(http::status::not_found, error_json("NotFound", target));
      }
      if (action == "turn" && req.method() == http::verb::post) {
        nlohmann::json body;
        try {
          body = nlohmann::json::parse(req.body());
        } catch (const nlohmann::json::exception& e) {
          return reply(http::status::bad_request, error_json("BadRequest", e.what()));
        }
        if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
          return reply(http::status::bad_request, error_json("BadRequest", "expected {\"text\": string}"));
        }
        auto r = engine_.post_user_turn(id, body["text"].get<std::string>());
        return reply(http::status::ok, {{"reply", r.reply}, {"debug", r.debug}});
      }
      if (action == "metrics" && req.method() == http::verb::get) {
        return reply(http::status::ok, to_json(engine_.metrics(id)));
      }
      if (action == "transcript" && req.method() == http::verb::get) {
        nlohmann::json turns = nlohmann::json::array();
        for (const auto& t : engine_.transcript(id)) turns.push_back(to_json(t));
        return reply(http::status::ok, {{"session_id", id}, {"turns", turns}});
      }
      return reply(http::status::not_found, error_json("NotFound", target));
    } catch (const UnknownSession& e) {
      return reply(http::status::not_found, error_json("UnknownSession", e.what()));
    } catch (const EmptyInput& e) {
      return reply(http::status::bad_request, error_json("EmptyInput", e.what()));
    } catch (const std::exception& e) {
      return reply(http::status::internal_server_error, error_json("InternalError", e.what()));
    }
  }

 private:
  void accept_loop() {
    while (running_) {
      boost::system::error_code ec;
      tcp::socket socket(io_);
      acceptor_.accept(socket, ec);
      if (ec) {
        if (!running_ || !acceptor_.is_open()) break;
        continue;
      }
      std::lock_guard lock(mutex_);
      open_sockets_.insert(socket.native_handle());
      workers_.emplace_back([this, s = std::move(socket)]() mutable { serve(std::move(s)); });
    }
  }

  void serve(tcp::socket socket) {
    int fd = socket.native_handle();
    beast::flat_buffer buffer;
    boost::system::error_code ec;
    while (running_) {
      http::request<http::string_body> req;
      http::read(socket, buffer, req, ec);
      if (ec) break;
      if (websocket::is_upgrade(req)) {
        stream(std::move(socket), req);
        break;
      }
      auto res = handle(req);
      http::write(socket, res, ec);
      if (ec || !res.keep_alive()) break;
    }
    std::lock_guard lock(mutex_);
    open_sockets_.erase(fd);
  }

  void stream(tcp::socket socket, const http::request<http::string_body>& req) {
    std::string id;
    std::string action;
    websocket::stream<tcp::socket> ws(std::move(socket));
    boost::system::error_code ec;
    if (!parse_session_target(std::string(req.target()), id, action) || action != "stream" ||
        !engine_.has_session(id)) {
      http::response<http::string_body> res{http::status::not_found, req.version()};
      res.set(http::field::content_type, "application/json");
      res.body() = error_json("UnknownSession", "no session for " + std::string(req.target())).dump();
      res.prepare_payload();
      http::write(ws.next_layer(), res, ec);
      return;
    }
    ws.accept(req, ec);
    if (ec) return;
    ws.text(true);
    auto send = [&](const nlohmann::json& frame) {
      ws.write(boost::asio::buffer(frame.dump()), ec);
      return !ec;
    };
    for (const auto& t : engine_.transcript(id)) {
      if (!send(turn_frame(t))) return;
    }
    while (running_) {
      beast::flat_buffer buffer;
      ws.read(buffer, ec);
      if (ec) return;
      nlohmann::json frame;
      try {
        frame = nlohmann::json::parse(beast::buffers_to_string(buffer.data()));
      } catch (const nlohmann::json::exception& e) {
        if (!send({{"type", "error"}, {"error", "BadFrame"}, {"message", e.what()}})) return;
        continue;
      }
      if (!frame.is_object() || frame.value("type", "") != "user_turn" || !frame.contains("text") ||
          !frame["text"].is_string()) {
        if (!send({{"type", "error"}, {"error", "BadFrame"}, {"message", "expected user_turn with text"}})) {
          return;
        }
        continue;
      }
      try {
        auto r = engine_.post_user_turn(id, frame["text"].get<std::string>());
        if (!send(turn_frame(r.user_turn)) || !send(turn_frame(r.system_turn)) ||
            !send({{"type", "debug_state"}, {"debug", r.debug}})) {
          return;
        }
      } catch (const Error& e) {
        if (!send({{"type", "error"}, {"error", "TurnError"}, {"message", e.what()}})) return;
      }
    }
    ws.close(websocket::close_code::normal, ec);
  }

  Engine& engine_;
  boost::asio::io_context io_;
  tcp::acceptor acceptor_;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  std::mutex mutex_;
  std::set<int> open_sockets_;
  std::vector<std::thread> workers_;
};

}  // namespace relchat
