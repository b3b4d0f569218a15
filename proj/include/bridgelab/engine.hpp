#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <utility>

#include "bridgelab/game.hpp"

namespace bridgelab {

// The logical engine API an agent sees. Native agents hold GameState values;
// bridged agents hold integer handles naming host-side states. The agents are
// written once against this concept, so every backend runs the same search.
template <class E>
concept Engine = requires(E& e, typename E::Handle& h, const typename E::Handle& ch, std::size_t i,
                          std::uint64_t seed) {
  { e.copy(ch) } -> std::same_as<typename E::Handle>;
  e.apply(h, i);
  { e.legal_moves(ch) } -> std::convertible_to<std::size_t>;
  { e.returns(ch) } -> std::same_as<Utilities>;
  { e.current_player(ch) } -> std::convertible_to<int>;
  { e.playout(ch, seed) } -> std::same_as<PlayoutResult>;
  e.release(h);
};

// Direct calls on GameState values.
struct NativeEngine {
  using Handle = GameState;

  GameState copy(const GameState& s) const { return s; }
  void apply(GameState& s, std::size_t move_index) const { s.apply(move_index); }
  std::size_t legal_moves(const GameState& s) const { return s.legal_move_count(); }
  Utilities returns(const GameState& s) const { return s.utilities(); }
  int current_player(const GameState& s) const { return s.mover(); }
  PlayoutResult playout(const GameState& s, std::uint64_t seed) const { return random_playout(s, seed); }
  void release(GameState&) const noexcept {}
};

static_assert(Engine<NativeEngine>);

// Releases a handle on scope exit. Release failures during unwinding are
// swallowed; the session-level drain reclaims anything left behind.
template <Engine E>
class ScopedHandle {
 public:
  ScopedHandle(E& engine, typename E::Handle h) : engine_(&engine), handle_(std::move(h)) {}
  ScopedHandle(const ScopedHandle&) = delete;
  ScopedHandle& operator=(const ScopedHandle&) = delete;
  ~ScopedHandle() {
    try {
      engine_->release(handle_);
    } catch (...) {
    }
  }

  typename E::Handle& get() noexcept { return handle_; }
  const typename E::Handle& get() const noexcept { return handle_; }

 private:
  E* engine_;
  typename E::Handle handle_;
};

}  // namespace bridgelab
