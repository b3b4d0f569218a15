#pragma once

// Reference guest: runs the agents against the host purely through the wire
// API, the way a foreign-runtime guest would.

#include <cstdint>
#include <string>
#include <utility>

#include "bridgelab/agents.hpp"
#include "bridgelab/control.hpp"
#include "bridgelab/socket.hpp"

namespace bridgelab {

// Sends one request and waits for its response.
inline json call(Socket& sock, std::uint64_t& next_id, const std::string& method, json params = json::object()) {
  const auto id = next_id++;
  sock.send_message(BridgeMessage::request(id, method, std::move(params)));
  auto resp = sock.receive_message();
  if (!resp) throw TransportError("host closed the connection during " + method);
  if (resp->id != id) throw ProtocolError("response id " + std::to_string(resp->id) + " != request id " + std::to_string(id));
  if (resp->kind == BridgeMessage::Kind::error) throw RemoteError(resp->error_code, resp->error_message);
  if (resp->kind != BridgeMessage::Kind::result) throw ProtocolError("expected a response, got a request");
  return std::move(resp->result);
}

// Engine concept over the engine channel: every operation is one round trip.
class RemoteEngine {
 public:
  using Handle = std::uint64_t;

  explicit RemoteEngine(Socket& sock) : sock_(&sock) {}

  Handle new_trial(const GameId& g) {
    return rpc("new_trial", {{"game", g.to_string()}}).at("handle").get<Handle>();
  }
  Handle copy(const Handle& h) { return rpc("copy", {{"handle", h}}).at("handle").get<Handle>(); }
  void apply(Handle& h, std::size_t move) { rpc("apply", {{"handle", h}, {"move", move}}); }
  std::size_t legal_moves(const Handle& h) { return rpc("legal_moves", {{"handle", h}}).at("count").get<std::size_t>(); }
  bool is_terminal(const Handle& h) { return rpc("is_terminal", {{"handle", h}}).at("terminal").get<bool>(); }
  Utilities returns(const Handle& h) { return utilities(rpc("returns", {{"handle", h}}).at("utilities")); }
  int current_player(const Handle& h) { return rpc("current_player", {{"handle", h}}).at("player").get<int>(); }
  PlayoutResult playout(const Handle& h, std::uint64_t seed) {
    auto r = rpc("playout", {{"handle", h}, {"seed", seed}});
    return {utilities(r.at("utilities")), r.at("plies").get<std::uint32_t>()};
  }
  void release(Handle& h) { rpc("release", {{"handle", h}}); }
  json engine_stats() { return rpc("engine_stats", json::object()); }

  std::uint64_t calls() const noexcept { return calls_; }

 private:
  static Utilities utilities(const json& a) { return Utilities{{a.at(0).get<double>(), a.at(1).get<double>()}}; }

  json rpc(const std::string& method, json params) {
    ++calls_;
    return call(*sock_, next_id_, method, std::move(params));
  }

  Socket* sock_;
  std::uint64_t next_id_ = 1;
  std::uint64_t calls_ = 0;
};

static_assert(Engine<RemoteEngine>);

// Exit codes shared with foreign guests.
enum GuestExit : int { kGuestOk = 0, kGuestUnreachable = 2, kGuestProtocolMismatch = 3, kGuestFailure = 4 };

class ReferenceGuest {
 public:
  // Connects and registers both channels. Throws TransportError if the host is
  // unreachable and RemoteError if the host refuses the handshake.
  static ReferenceGuest connect(const std::string& host, std::uint16_t port, int protocol = kProtocolVersion) {
    ReferenceGuest g;
    g.engine_ = connect_tcp(host, port);
    hello(g.engine_, "engine", protocol);
    g.control_ = connect_tcp(host, port);
    hello(g.control_, "control", protocol);
    return g;
  }

  // Serves select_move until shutdown (returns kGuestOk) or until the host goes
  // away (returns kGuestFailure).
  int run() {
    RemoteEngine engine(engine_);
    for (;;) {
      std::optional<BridgeMessage> req;
      try {
        req = control_.receive_message();
      } catch (const std::exception&) {
        return kGuestFailure;
      }
      if (!req) return kGuestFailure;
      if (!req->is_request()) return kGuestFailure;
      if (req->method == "shutdown") {
        control_.send_message(BridgeMessage::success(req->id));
        return kGuestOk;
      }
      BridgeMessage resp;
      if (req->method == "select_move") {
        try {
          const auto r = select_move_from_json(req->params);
          auto result = select_move(engine, r.agent, r.handle, r.budget, r.seed, r.c);
          resp = BridgeMessage::success(req->id, to_json(result));
        } catch (const RemoteError& e) {
          resp = BridgeMessage::failure(req->id, e.code(), e.what());
        } catch (const TransportError&) {
          return kGuestFailure;
        } catch (const std::exception& e) {
          resp = BridgeMessage::failure(req->id, kInternal, e.what());
        }
      } else if (req->method == "ping") {
        resp = BridgeMessage::success(req->id, {{"ok", true}});
      } else {
        resp = BridgeMessage::failure(req->id, kUnknownMethod, "unknown control method '" + req->method + "'");
      }
      try {
        control_.send_message(resp);
      } catch (const std::exception&) {
        return kGuestFailure;
      }
    }
  }

  Socket& engine_channel() noexcept { return engine_; }
  Socket& control_channel() noexcept { return control_; }

 private:
  static void hello(Socket& s, const std::string& role, int protocol) {
    std::uint64_t id = 0;
    auto r = call(s, id, "hello", hello_params(role, protocol));
    if (!r.value("ok", false)) throw ProtocolError("host did not accept hello");
  }

  Socket engine_;
  Socket control_;
};

// Process entry point used by the CLI: maps failures onto the guest exit codes.
inline int reference_guest_main(const std::string& host, std::uint16_t port, std::string* diagnostic = nullptr,
                                int protocol = kProtocolVersion) {
  try {
    auto guest = ReferenceGuest::connect(host, port, protocol);
    return guest.run();
  } catch (const RemoteError& e) {
    if (diagnostic) *diagnostic = e.what();
    return kGuestProtocolMismatch;
  } catch (const TransportError& e) {
    if (diagnostic) *diagnostic = e.what();
    return kGuestUnreachable;
  } catch (const std::exception& e) {
    if (diagnostic) *diagnostic = e.what();
    return kGuestFailure;
  }
}

}  // namespace bridgelab
