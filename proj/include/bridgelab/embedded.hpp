#pragma once

// Embedded backend contract: the guest runtime lives in this process and talks
// to the engine through plain C calls that exchange only integers and small
// double arrays. No framing, no serialization.
//
// Exactly one translation unit of a program must define
// BRIDGELAB_EMBEDDED_IMPLEMENTATION before including this header; that unit
// emits the extern "C" symbols a guest extension links against.

#include <cstdint>

extern "C" {

// Status codes match the wire protocol error codes; 0 is success.
typedef int (*bl_select_move_fn)(void* user, std::uint64_t root_handle, int agent /*0 uct, 1 minimax*/,
                                 std::int64_t max_iterations /*0 = wall mode*/, std::int64_t wall_ms, std::uint64_t seed,
                                 double c, std::int64_t out_counts[3] /*move, playouts, expansions*/,
                                 double* out_elapsed);

int bl_register_guest(bl_select_move_fn fn, void* user);
void bl_unregister_guest(void);

int bl_copy(std::uint64_t handle, std::uint64_t* out_handle);
int bl_apply(std::uint64_t handle, std::int64_t move);
int bl_legal_moves(std::uint64_t handle, std::int64_t* out_count);
int bl_is_terminal(std::uint64_t handle, std::int64_t* out_terminal);
int bl_returns(std::uint64_t handle, double out_utilities[2]);
int bl_current_player(std::uint64_t handle, std::int64_t* out_player);
int bl_playout(std::uint64_t handle, std::uint64_t seed, double out_utilities[2], std::int64_t* out_plies);
int bl_release(std::uint64_t handle);
int bl_live_handles(std::int64_t* out_count);
std::uint64_t bl_call_count(void);

// Entry point a guest extension exports; it must call bl_register_guest.
typedef int (*bl_guest_init_fn)(void);
}

#include <dlfcn.h>

#include <mutex>
#include <stdexcept>
#include <string>

#include "bridgelab/agents.hpp"
#include "bridgelab/service.hpp"
#include "bridgelab/wire.hpp"

namespace bridgelab {

class EmbeddedUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Process-wide session behind the C entry points.
class EmbeddedHost {
 public:
  static EmbeddedHost& instance() {
    static EmbeddedHost host;
    return host;
  }

  template <class F>
  int guarded(F&& f) noexcept {
    try {
      std::lock_guard lock(mu_);
      ++calls_;
      f(table_);
      return 0;
    } catch (const BadHandle&) {
      return kBadHandle;
    } catch (const NotTerminal&) {
      return kNotTerminal;
    } catch (const IllegalMove&) {
      return kIllegalMove;
    } catch (const std::exception&) {
      return kInternal;
    }
  }

  std::uint64_t adopt(GameState s) {
    std::lock_guard lock(mu_);
    return table_.insert(std::move(s));
  }
  void release(std::uint64_t h) {
    std::lock_guard lock(mu_);
    table_.release(h);
  }
  std::size_t live_handles() {
    std::lock_guard lock(mu_);
    return table_.size();
  }
  std::uint64_t calls() {
    std::lock_guard lock(mu_);
    return calls_;
  }

  void register_guest(bl_select_move_fn fn, void* user) {
    std::lock_guard lock(mu_);
    guest_ = fn;
    user_ = user;
  }
  bool available() {
    std::lock_guard lock(mu_);
    return guest_ != nullptr;
  }

  SearchResult select_move(Algorithm agent, const GameState& root, const SearchBudget& budget, std::uint64_t seed,
                           double c = kDefaultExploration) {
    bl_select_move_fn fn;
    void* user;
    {
      std::lock_guard lock(mu_);
      fn = guest_;
      user = user_;
    }
    if (!fn) throw EmbeddedUnavailable("no embedded guest registered");
    const auto h = adopt(root);
    std::int64_t counts[3] = {0, 0, 0};
    double elapsed = 0.0;
    const int rc = fn(user, h, agent == Algorithm::uct ? 0 : 1,
                      budget.is_wall() ? 0 : static_cast<std::int64_t>(budget.max_iterations()),
                      budget.is_wall() ? budget.wall_ms() : 0, seed, c, counts, &elapsed);
    release(h);
    if (rc != 0) throw RemoteError(rc, "embedded guest select_move failed");
    SearchResult r;
    r.move_index = static_cast<std::size_t>(counts[0]);
    r.playouts = static_cast<std::uint64_t>(counts[1]);
    r.expansions = static_cast<std::uint64_t>(counts[2]);
    r.elapsed = elapsed;
    return r;
  }

 private:
  std::mutex mu_;
  HandleTable table_;
  std::uint64_t calls_ = 0;
  bl_select_move_fn guest_ = nullptr;
  void* user_ = nullptr;
};

// Loads a guest extension (shared library exporting bl_guest_init).
inline void load_embedded_guest(const std::string& path) {
  void* lib = ::dlopen(path.c_str(), RTLD_NOW | RTLD_GLOBAL);
  if (!lib) throw EmbeddedUnavailable("cannot load embedded guest '" + path + "': " + ::dlerror());
  auto init = reinterpret_cast<bl_guest_init_fn>(::dlsym(lib, "bl_guest_init"));
  if (!init) throw EmbeddedUnavailable("'" + path + "' does not export bl_guest_init");
  if (init() != 0) throw EmbeddedUnavailable("bl_guest_init failed in '" + path + "'");
  if (!EmbeddedHost::instance().available()) throw EmbeddedUnavailable("'" + path + "' did not register a guest");
}

// Engine concept over the C entry points; used by the in-process reference
// guest and mirrored by foreign guests.
struct AbiEngine {
  using Handle = std::uint64_t;

  static void check(int rc) {
    if (rc != 0) throw RemoteError(rc, "embedded engine call failed");
  }

  Handle copy(const Handle& h) const {
    Handle out = 0;
    check(bl_copy(h, &out));
    return out;
  }
  void apply(Handle& h, std::size_t move) const { check(bl_apply(h, static_cast<std::int64_t>(move))); }
  std::size_t legal_moves(const Handle& h) const {
    std::int64_t n = 0;
    check(bl_legal_moves(h, &n));
    return static_cast<std::size_t>(n);
  }
  Utilities returns(const Handle& h) const {
    Utilities u;
    check(bl_returns(h, u.u.data()));
    return u;
  }
  int current_player(const Handle& h) const {
    std::int64_t p = 0;
    check(bl_current_player(h, &p));
    return static_cast<int>(p);
  }
  PlayoutResult playout(const Handle& h, std::uint64_t seed) const {
    PlayoutResult r;
    std::int64_t plies = 0;
    check(bl_playout(h, seed, r.utilities.u.data(), &plies));
    r.plies = static_cast<std::uint32_t>(plies);
    return r;
  }
  void release(Handle& h) const { check(bl_release(h)); }
};

static_assert(Engine<AbiEngine>);

// Reference embedded guest written against the C contract only.
inline int reference_embedded_select_move(void*, std::uint64_t root, int agent, std::int64_t max_iterations,
                                          std::int64_t wall_ms, std::uint64_t seed, double c,
                                          std::int64_t out_counts[3], double* out_elapsed) {
  try {
    AbiEngine engine;
    const auto budget = max_iterations > 0 ? SearchBudget::iterations(static_cast<std::uint64_t>(max_iterations))
                                           : SearchBudget::wall(wall_ms);
    const auto r = select_move(engine, agent == 0 ? Algorithm::uct : Algorithm::minimax, root, budget, seed, c);
    out_counts[0] = static_cast<std::int64_t>(r.move_index);
    out_counts[1] = static_cast<std::int64_t>(r.playouts);
    out_counts[2] = static_cast<std::int64_t>(r.expansions);
    *out_elapsed = r.elapsed;
    return 0;
  } catch (const RemoteError& e) {
    return e.code();
  } catch (const std::exception&) {
    return kInternal;
  }
}

}  // namespace bridgelab

#ifdef BRIDGELAB_EMBEDDED_IMPLEMENTATION

extern "C" {

int bl_register_guest(bl_select_move_fn fn, void* user) {
  if (!fn) return bridgelab::kBadParams;
  bridgelab::EmbeddedHost::instance().register_guest(fn, user);
  return 0;
}

void bl_unregister_guest(void) { bridgelab::EmbeddedHost::instance().register_guest(nullptr, nullptr); }

int bl_copy(std::uint64_t handle, std::uint64_t* out_handle) {
  return bridgelab::EmbeddedHost::instance().guarded(
      [&](bridgelab::HandleTable& t) { *out_handle = t.insert(t.at(handle)); });
}

int bl_apply(std::uint64_t handle, std::int64_t move) {
  return bridgelab::EmbeddedHost::instance().guarded([&](bridgelab::HandleTable& t) {
    if (move < 0) throw bridgelab::IllegalMove("negative move index");
    t.at(handle).apply(static_cast<std::size_t>(move));
  });
}

int bl_legal_moves(std::uint64_t handle, std::int64_t* out_count) {
  return bridgelab::EmbeddedHost::instance().guarded(
      [&](bridgelab::HandleTable& t) { *out_count = static_cast<std::int64_t>(t.at(handle).legal_move_count()); });
}

int bl_is_terminal(std::uint64_t handle, std::int64_t* out_terminal) {
  return bridgelab::EmbeddedHost::instance().guarded(
      [&](bridgelab::HandleTable& t) { *out_terminal = t.at(handle).is_terminal() ? 1 : 0; });
}

int bl_returns(std::uint64_t handle, double out_utilities[2]) {
  return bridgelab::EmbeddedHost::instance().guarded([&](bridgelab::HandleTable& t) {
    const auto u = t.at(handle).utilities();
    out_utilities[0] = u.u[0];
    out_utilities[1] = u.u[1];
  });
}

int bl_current_player(std::uint64_t handle, std::int64_t* out_player) {
  return bridgelab::EmbeddedHost::instance().guarded(
      [&](bridgelab::HandleTable& t) { *out_player = t.at(handle).mover(); });
}

int bl_playout(std::uint64_t handle, std::uint64_t seed, double out_utilities[2], std::int64_t* out_plies) {
  return bridgelab::EmbeddedHost::instance().guarded([&](bridgelab::HandleTable& t) {
    const auto r = bridgelab::random_playout(t.at(handle), seed);
    out_utilities[0] = r.utilities.u[0];
    out_utilities[1] = r.utilities.u[1];
    *out_plies = r.plies;
  });
}

int bl_release(std::uint64_t handle) {
  return bridgelab::EmbeddedHost::instance().guarded([&](bridgelab::HandleTable& t) { t.release(handle); });
}

int bl_live_handles(std::int64_t* out_count) {
  *out_count = static_cast<std::int64_t>(bridgelab::EmbeddedHost::instance().live_handles());
  return 0;
}

std::uint64_t bl_call_count(void) { return bridgelab::EmbeddedHost::instance().calls(); }

}  // extern "C"

#endif  // BRIDGELAB_EMBEDDED_IMPLEMENTATION
