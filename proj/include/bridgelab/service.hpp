#pragma once

// Host-side engine service: owns the handle table of one guest session and
// answers engine-channel requests.

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bridgelab/game.hpp"
#include "bridgelab/wire.hpp"

namespace bridgelab {

class BadHandle : public std::runtime_error {
 public:
  explicit BadHandle(std::uint64_t h) : std::runtime_error("unknown handle " + std::to_string(h)) {}
};

class BadParams : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Handles are never reused within a session.
class HandleTable {
 public:
  std::uint64_t insert(GameState s) {
    const auto h = next_++;
    entries_.emplace(h, std::move(s));
    return h;
  }
  GameState& at(std::uint64_t h) {
    auto it = entries_.find(h);
    if (it == entries_.end()) throw BadHandle(h);
    return it->second;
  }
  void release(std::uint64_t h) {
    if (entries_.erase(h) == 0) throw BadHandle(h);
  }
  std::size_t size() const noexcept { return entries_.size(); }
  void clear() noexcept { entries_.clear(); }

 private:
  std::unordered_map<std::uint64_t, GameState> entries_;
  std::uint64_t next_ = 1;
};

using CallCounters = std::map<std::string, std::uint64_t>;

inline const std::vector<std::string>& engine_methods() {
  static const std::vector<std::string> methods = {"new_trial",      "copy",    "apply",   "legal_moves",
                                                   "is_terminal",    "returns", "current_player",
                                                   "playout",        "release", "engine_stats"};
  return methods;
}

namespace detail {

inline std::uint64_t get_u64(const json& params, const char* key) {
  auto it = params.find(key);
  if (it == params.end()) throw BadParams(std::string("missing parameter '") + key + "'");
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  if (it->is_number_integer() && it->get<std::int64_t>() >= 0) return it->get<std::uint64_t>();
  throw BadParams(std::string("parameter '") + key + "' must be a non-negative integer");
}

inline json utilities_json(const Utilities& u) { return json::array({u.u[0], u.u[1]}); }

}  // namespace detail

// Serial per session; a mutex guards the table because the host's control
// thread also adopts and releases root handles.
class EngineService {
 public:
  // An empty registry allows every game.
  explicit EngineService(std::vector<std::string> registry = {}) : registry_(std::move(registry)) {}

  BridgeMessage handle(const BridgeMessage& req) {
    std::lock_guard lock(mu_);
    if (!req.is_request()) return BridgeMessage::failure(req.id, kBadParams, "expected a request");
    try {
      auto r = dispatch(req.method, req.params);
      return BridgeMessage::success(req.id, std::move(r));
    } catch (const BadHandle& e) {
      return BridgeMessage::failure(req.id, kBadHandle, e.what());
    } catch (const NotTerminal& e) {
      return BridgeMessage::failure(req.id, kNotTerminal, e.what());
    } catch (const IllegalMove& e) {
      return BridgeMessage::failure(req.id, kIllegalMove, e.what());
    } catch (const UnknownMethod& e) {
      return BridgeMessage::failure(req.id, kUnknownMethod, e.what());
    } catch (const InvalidGame& e) {
      return BridgeMessage::failure(req.id, kBadParams, e.what());
    } catch (const BadParams& e) {
      return BridgeMessage::failure(req.id, kBadParams, e.what());
    } catch (const json::exception& e) {
      return BridgeMessage::failure(req.id, kBadParams, e.what());
    } catch (const std::exception& e) {
      return BridgeMessage::failure(req.id, kInternal, e.what());
    }
  }

  // Host-side entry points used around a select_move.
  std::uint64_t adopt(GameState s) {
    std::lock_guard lock(mu_);
    return table_.insert(std::move(s));
  }
  void release(std::uint64_t h) {
    std::lock_guard lock(mu_);
    table_.release(h);
  }
  GameState state(std::uint64_t h) {
    std::lock_guard lock(mu_);
    return table_.at(h);
  }
  std::size_t live_handles() {
    std::lock_guard lock(mu_);
    return table_.size();
  }
  CallCounters calls() {
    std::lock_guard lock(mu_);
    return calls_;
  }
  std::uint64_t total_calls() {
    std::lock_guard lock(mu_);
    std::uint64_t n = 0;
    for (auto& [k, v] : calls_) n += v;
    return n;
  }
  void drain() {
    std::lock_guard lock(mu_);
    table_.clear();
  }

 private:
  class UnknownMethod : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
  };

  json dispatch(const std::string& method, const json& p) {
    if (std::find(engine_methods().begin(), engine_methods().end(), method) == engine_methods().end()) {
      throw UnknownMethod("unknown method '" + method + "'");
    }
    ++calls_[method];
    if (method == "new_trial") {
      auto it = p.find("game");
      if (it == p.end() || !it->is_string()) throw BadParams("new_trial needs a string 'game'");
      auto id = GameId::parse(it->get<std::string>());
      if (!registry_.empty() && std::find(registry_.begin(), registry_.end(), id.name()) == registry_.end()) {
        throw BadParams("game '" + id.name() + "' is not served");
      }
      return {{"handle", table_.insert(new_trial(id))}};
    }
    if (method == "engine_stats") {
      return {{"live_handles", table_.size()}, {"calls", calls_}};
    }
    const auto h = detail::get_u64(p, "handle");
    if (method == "release") {
      table_.release(h);
      return json::object();
    }
    auto& s = table_.at(h);
    if (method == "copy") return {{"handle", table_.insert(s)}};
    if (method == "apply") {
      s.apply(static_cast<std::size_t>(detail::get_u64(p, "move")));
      return json::object();
    }
    if (method == "legal_moves") return {{"count", s.legal_move_count()}};
    if (method == "is_terminal") return {{"terminal", s.is_terminal()}};
    if (method == "returns") return {{"utilities", detail::utilities_json(s.utilities())}};
    if (method == "current_player") return {{"player", s.mover()}};
    // playout
    auto out = random_playout(s, detail::get_u64(p, "seed"));
    return {{"utilities", detail::utilities_json(out.utilities)}, {"plies", out.plies}};
  }

  std::mutex mu_;
  HandleTable table_;
  CallCounters calls_;
  std::vector<std::string> registry_;
};

}  // namespace bridgelab
