#pragma once

// Socket backend, host side. A guest opens two loopback connections and says
// hello on each: the engine channel carries guest->host engine calls, the
// control channel carries host->guest select_move requests.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bridgelab/agents.hpp"
#include "bridgelab/control.hpp"
#include "bridgelab/service.hpp"
#include "bridgelab/socket.hpp"

namespace bridgelab {

class GuestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HostServer {
 public:
  explicit HostServer(std::uint16_t port = kDefaultPort, std::vector<std::string> registry = {})
      : listener_(port), service_(std::move(registry)) {}

  HostServer(const HostServer&) = delete;
  HostServer& operator=(const HostServer&) = delete;

  ~HostServer() {
    try {
      if (attached()) shutdown_guest();
    } catch (...) {
    }
    close_session();
  }

  std::uint16_t port() const noexcept { return listener_.port(); }
  EngineService& service() noexcept { return service_; }
  bool attached() const noexcept { return attached_.load(); }

  // Hard limit on a select_move under an iteration budget; wall budgets get ten
  // times the budget.
  void set_iteration_timeout(std::chrono::milliseconds t) { iteration_timeout_ = t; }

  // Accepts connections until one engine and one control channel have
  // completed the handshake. Bad handshakes are answered and dropped.
  void wait_for_guest(std::chrono::milliseconds timeout = std::chrono::seconds(30)) {
    if (attached()) throw GuestError("a guest is already attached");
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    Socket engine, control;
    while (!engine.valid() || !control.valid()) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw TimeoutError("guest did not complete the handshake in time");
      Socket s = listener_.accept(left);
      std::optional<BridgeMessage> hello;
      try {
        hello = s.receive_message(left);
      } catch (const std::exception&) {
        continue;
      }
      if (!hello) continue;
      auto [ok, role, reply] = check_hello(*hello, engine.valid(), control.valid());
      try {
        s.send_message(reply);
      } catch (const std::exception&) {
        continue;
      }
      if (!ok) continue;
      (role == "engine" ? engine : control) = std::move(s);
    }
    engine_ = std::move(engine);
    control_ = std::move(control);
    attached_ = true;
    engine_thread_ = std::thread([this] { serve_engine(); });
  }

  // Host-side half of a bridged search: adopts the root into the session's
  // handle table, asks the guest to search it and releases it again.
  SearchResult select_move(Algorithm agent, const GameState& root, const SearchBudget& budget, std::uint64_t seed,
                           double c = kDefaultExploration) {
    if (!attached()) throw GuestError("no guest attached");
    const auto root_handle = service_.adopt(root);
    SearchResult result;
    try {
      result = select_move_handle(agent, root_handle, budget, seed, c);
    } catch (...) {
      try {
        service_.release(root_handle);
      } catch (const BadHandle&) {
      }
      throw;
    }
    service_.release(root_handle);
    return result;
  }

  SearchResult select_move_handle(Algorithm agent, std::uint64_t root_handle, const SearchBudget& budget,
                                  std::uint64_t seed, double c = kDefaultExploration) {
    if (!attached()) throw GuestError("no guest attached");
    SelectMoveRequest req{root_handle, agent, budget, seed, c};
    const auto timeout = budget.is_wall() ? std::chrono::milliseconds(budget.wall_ms() * 10) : iteration_timeout_;
    BridgeMessage resp;
    try {
      resp = control_call("select_move", to_json(req), timeout);
    } catch (const TimeoutError&) {
      fail_session();
      throw GuestError("guest exceeded the select_move time limit and was disconnected");
    } catch (const ProtocolError& e) {
      fail_session();
      throw GuestError(std::string("guest protocol violation: ") + e.what());
    }
    if (resp.kind == BridgeMessage::Kind::error) throw RemoteError(resp.error_code, resp.error_message);
    try {
      return search_result_from_json(resp.result);
    } catch (const std::exception& e) {
      fail_session();
      throw GuestError(std::string("guest protocol violation: malformed select_move result: ") + e.what());
    }
  }

  // Asks the guest to exit and closes the session.
  void shutdown_guest() {
    if (!attached()) return;
    try {
      control_call("shutdown", json::object(), std::chrono::seconds(5));
    } catch (const std::exception&) {
    }
    close_session();
  }

 private:
  struct HelloCheck {
    bool ok;
    std::string role;
    BridgeMessage reply;
  };

  static HelloCheck check_hello(const BridgeMessage& m, bool have_engine, bool have_control) {
    if (!m.is_request() || m.method != "hello") {
      return {false, "", BridgeMessage::failure(m.id, kBadParams, "first message must be hello")};
    }
    const int protocol = m.params.value("protocol", -1);
    if (protocol != kProtocolVersion) {
      return {false, "",
              BridgeMessage::failure(m.id, kBadParams,
                                     "unsupported protocol " + std::to_string(protocol) + " (host speaks 1)")};
    }
    const std::string role = m.params.value("role", "");
    if (role != "engine" && role != "control") {
      return {false, "", BridgeMessage::failure(m.id, kBadParams, "role must be engine or control")};
    }
    if ((role == "engine" && have_engine) || (role == "control" && have_control)) {
      return {false, "", BridgeMessage::failure(m.id, kBadParams, "duplicate registration of role " + role)};
    }
    return {true, role, BridgeMessage::success(m.id, {{"ok", true}, {"protocol", kProtocolVersion}})};
  }

  void serve_engine() {
    try {
      for (;;) {
        auto req = engine_.receive_message();
        if (!req) break;
        engine_.send_message(service_.handle(*req));
      }
    } catch (const std::exception&) {
    }
    // The guest is gone or misbehaved; wake the control side.
    control_.shutdown();
  }

  BridgeMessage control_call(const std::string& method, json params, std::chrono::milliseconds timeout) {
    std::lock_guard lock(control_mu_);
    const auto id = next_control_id_++;
    control_.send_message(BridgeMessage::request(id, method, std::move(params)));
    auto resp = control_.receive_message(timeout);
    if (!resp) throw ProtocolError("guest disconnected");
    if (resp->id != id || resp->is_request()) throw ProtocolError("unexpected message on control channel");
    return std::move(*resp);
  }

  void fail_session() {
    close_session();
    service_.drain();
  }

  void close_session() {
    attached_ = false;
    engine_.shutdown();
    control_.shutdown();
    if (engine_thread_.joinable()) engine_thread_.join();
    engine_.close();
    control_.close();
  }

  Listener listener_;
  EngineService service_;
  Socket engine_;
  Socket control_;
  std::thread engine_thread_;
  std::atomic<bool> attached_{false};
  std::mutex control_mu_;
  std::uint64_t next_control_id_ = 1;
  std::chrono::milliseconds iteration_timeout_{std::chrono::minutes(10)};
};

}  // namespace bridgelab
