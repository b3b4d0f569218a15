#pragma once

// The three execution backends behind one interface. Under an iteration
// budget and a fixed seed all three return the same decision; only the
// elapsed time differs.

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>

#include "bridgelab/agents.hpp"
#include "bridgelab/embedded.hpp"
#include "bridgelab/guest.hpp"
#include "bridgelab/host.hpp"

namespace bridgelab {

enum class BackendKind { native, embedded, socket };

inline std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::native:
      return "native";
    case BackendKind::embedded:
      return "embedded";
    case BackendKind::socket:
      return "socket";
  }
  return "?";
}

inline BackendKind parse_backend(std::string_view s) {
  if (s == "native") return BackendKind::native;
  if (s == "embedded") return BackendKind::embedded;
  if (s == "socket") return BackendKind::socket;
  throw std::invalid_argument("unknown backend '" + std::string(s) + "' (expected native|embedded|socket)");
}

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendKind kind() const = 0;
  SearchResult select_move(Algorithm agent, const GameState& root, const SearchBudget& budget, std::uint64_t seed,
                           double c = kDefaultExploration) {
    return do_select_move(agent, root, budget, seed, c);
  }

 protected:
  virtual SearchResult do_select_move(Algorithm agent, const GameState& root, const SearchBudget& budget,
                                      std::uint64_t seed, double c) = 0;
};

class NativeBackend final : public Backend {
 public:
  BackendKind kind() const override { return BackendKind::native; }

 protected:
  SearchResult do_select_move(Algorithm agent, const GameState& root, const SearchBudget& budget, std::uint64_t seed,
                              double c) override {
    NativeEngine engine;
    return bridgelab::select_move(engine, agent, root, budget, seed, c);
  }
};

inline constexpr std::string_view kMissingEmbeddedGuest =
    "embedded backend unavailable: the guest-agent component (Python embedded guest) is not built or linked; "
    "pass --guest-lib PATH to a built guest extension";

class EmbeddedBackend final : public Backend {
 public:
  EmbeddedBackend() {
    if (!EmbeddedHost::instance().available()) throw EmbeddedUnavailable(std::string(kMissingEmbeddedGuest));
  }
  BackendKind kind() const override { return BackendKind::embedded; }

 protected:
  SearchResult do_select_move(Algorithm agent, const GameState& root, const SearchBudget& budget, std::uint64_t seed,
                              double c) override {
    return EmbeddedHost::instance().select_move(agent, root, budget, seed, c);
  }
};

// Host server plus, unless an external guest is expected, the reference guest
// running on its own thread over loopback TCP.
class SocketBackend final : public Backend {
 public:
  explicit SocketBackend(std::uint16_t port = 0, bool spawn_reference_guest = true,
                         std::chrono::milliseconds attach_timeout = std::chrono::seconds(30))
      : server_(port) {
    if (spawn_reference_guest) {
      const auto p = server_.port();
      guest_ = std::thread([this, p] { guest_exit_ = reference_guest_main("127.0.0.1", p); });
    }
    try {
      server_.wait_for_guest(attach_timeout);
    } catch (...) {
      if (guest_.joinable()) guest_.join();
      throw;
    }
  }

  ~SocketBackend() override {
    try {
      server_.shutdown_guest();
    } catch (...) {
    }
    if (guest_.joinable()) guest_.join();
  }

  BackendKind kind() const override { return BackendKind::socket; }
  HostServer& server() noexcept { return server_; }

 protected:
  SearchResult do_select_move(Algorithm agent, const GameState& root, const SearchBudget& budget, std::uint64_t seed,
                              double c) override {
    return server_.select_move(agent, root, budget, seed, c);
  }

 private:
  HostServer server_;
  std::thread guest_;
  int guest_exit_ = 0;
};

inline std::unique_ptr<Backend> make_backend(BackendKind kind) {
  switch (kind) {
    case BackendKind::native:
      return std::make_unique<NativeBackend>();
    case BackendKind::embedded:
      return std::make_unique<EmbeddedBackend>();
    case BackendKind::socket:
      return std::make_unique<SocketBackend>();
  }
  throw std::invalid_argument("bad backend kind");
}

}  // namespace bridgelab
