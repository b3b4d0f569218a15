#pragma once

// Deterministic two-player zero-sum game engine. Moves are addressed as
// indices into the current state's legal-move list, whose order is fixed per
// game.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bridgelab/rng.hpp"

namespace bridgelab {

class GameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unknown game, unknown parameter key or out-of-range parameter value.
class InvalidGame : public GameError {
 public:
  using GameError::GameError;
};

// Move index out of range, or a move on a terminal state.
class IllegalMove : public GameError {
 public:
  using GameError::GameError;
};

// Utilities requested for a non-terminal state.
class NotTerminal : public GameError {
 public:
  using GameError::GameError;
};

enum class GameKind { synthetic, tictactoe, nim, breakthrough };

inline constexpr std::array<std::string_view, 4> kGameNames = {"synthetic", "tictactoe", "nim",
                                                               "breakthrough"};

inline constexpr int kMaxNimHeaps = 16;
inline constexpr int kMaxNimHeap = 1000;
inline constexpr int kMaxBoardCells = 64;

// A game name plus its integer parameters. Construction validates the keys
// and fills in defaults, so two ids naming the same game compare equal.
class GameId {
 public:
  GameId() : GameId("tictactoe", {}) {}

  GameId(std::string name, std::map<std::string, std::int64_t> params)
      : name_(std::move(name)), params_(std::move(params)) {
    validate();
  }

  // Text form: name or name{key=value,...}. For nim, bare integers are a
  // shorthand for the heap list: nim{3,4,5} == nim{heap0=3,heap1=4,heap2=5}.
  static GameId parse(std::string_view text);

  const std::string& name() const noexcept { return name_; }
  GameKind kind() const noexcept { return kind_; }
  const std::map<std::string, std::int64_t>& params() const noexcept { return params_; }

  std::int64_t param(const std::string& key) const {
    auto it = params_.find(key);
    if (it == params_.end()) throw InvalidGame("game " + name_ + " has no parameter " + key);
    return it->second;
  }

  std::vector<int> nim_heaps() const {
    std::vector<int> heaps;
    for (int i = 0;; ++i) {
      auto it = params_.find("heap" + std::to_string(i));
      if (it == params_.end()) break;
      heaps.push_back(static_cast<int>(it->second));
    }
    return heaps;
  }

  std::string to_string() const;

  friend bool operator==(const GameId&, const GameId&) = default;

 private:
  void validate();

  std::string name_;
  std::map<std::string, std::int64_t> params_;
  GameKind kind_ = GameKind::tictactoe;
};

// One row of `games list`: a game name and a human-readable parameter schema.
struct GameSchema {
  std::string_view name;
  std::string_view params;
};

inline constexpr std::array<GameSchema, 4> kGameSchemas = {{
    {"synthetic", "branching=1..64 (default 3), depth=1..64 (default 5), cost_knob=1..10000000 (default 1)"},
    {"tictactoe", "(no parameters)"},
    {"nim", "heap0..heap15=1..1000 (default heap0=3,heap1=4,heap2=5)"},
    {"breakthrough", "size=4..8 (default 5)"},
}};

namespace detail {

inline void check_range(const std::string& game, const std::string& key, std::int64_t v,
                        std::int64_t lo, std::int64_t hi) {
  if (v < lo || v > hi) {
    throw InvalidGame(game + ": parameter " + key + "=" + std::to_string(v) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::int64_t parse_int(std::string_view s, std::string_view context) {
  s = trim(s);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw InvalidGame("not an integer in " + std::string(context) + ": '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace detail

inline void GameId::validate() {
  auto defaults = [&](std::initializer_list<std::pair<const char*, std::int64_t>> d) {
    for (auto& [k, v] : d) params_.try_emplace(k, v);
  };
  auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
    for (auto& [k, v] : params_) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; })) {
        throw InvalidGame(name_ + ": unknown parameter '" + k + "'");
      }
    }
  };

  if (name_ == "synthetic") {
    kind_ = GameKind::synthetic;
    reject_unknown({"branching", "depth", "cost_knob"});
    defaults({{"branching", 3}, {"depth", 5}, {"cost_knob", 1}});
    detail::check_range(name_, "branching", params_["branching"], 1, 64);
    detail::check_range(name_, "depth", params_["depth"], 1, 64);
    detail::check_range(name_, "cost_knob", params_["cost_knob"], 1, 10'000'000);
  } else if (name_ == "tictactoe") {
    kind_ = GameKind::tictactoe;
    reject_unknown({});
  } else if (name_ == "nim") {
    kind_ = GameKind::nim;
    if (params_.empty()) params_ = {{"heap0", 3}, {"heap1", 4}, {"heap2", 5}};
    std::size_t seen = 0;
    for (int i = 0; i < kMaxNimHeaps; ++i) {
      auto key = "heap" + std::to_string(i);
      auto it = params_.find(key);
      if (it == params_.end()) break;
      detail::check_range(name_, key, it->second, 1, kMaxNimHeap);
      ++seen;
    }
    if (seen != params_.size()) {
      throw InvalidGame("nim: parameters must be heap0..heapN-1 (contiguous, at most " +
                        std::to_string(kMaxNimHeaps) + ")");
    }
  } else if (name_ == "breakthrough") {
    kind_ = GameKind::breakthrough;
    reject_unknown({"size"});
    defaults({{"size", 5}});
    detail::check_range(name_, "size", params_["size"], 4, 8);
  } else {
    throw InvalidGame("unknown game '" + name_ + "'");
  }
}

inline GameId GameId::parse(std::string_view text) {
  text = detail::trim(text);
  auto brace = text.find('{');
  if (brace == std::string_view::npos) return GameId(std::string(text), {});
  if (text.back() != '}') throw InvalidGame("game id missing closing brace: " + std::string(text));
  std::string name(detail::trim(text.substr(0, brace)));
  std::string_view body = text.substr(brace + 1, text.size() - brace - 2);

  std::map<std::string, std::int64_t> params;
  int bare = 0;
  while (!detail::trim(body).empty()) {
    auto comma = body.find(',');
    auto item = detail::trim(body.substr(0, comma));
    body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
    auto eq = item.find_first_of("=:");
    if (eq == std::string_view::npos) {
      if (name != "nim") throw InvalidGame("expected key=value in " + std::string(text));
      params["heap" + std::to_string(bare++)] = detail::parse_int(item, text);
      continue;
    }
    std::string key(detail::trim(item.substr(0, eq)));
    if (key.empty()) throw InvalidGame("empty parameter name in " + std::string(text));
    if (!params.emplace(key, detail::parse_int(item.substr(eq + 1), text)).second) {
      throw InvalidGame("duplicate parameter '" + key + "' in " + std::string(text));
    }
  }
  return GameId(std::move(name), std::move(params));
}

inline std::string GameId::to_string() const {
  if (params_.empty()) return name_;
  std::vector<std::pair<std::string, std::int64_t>> ordered(params_.begin(), params_.end());
  if (kind_ == GameKind::synthetic) {
    ordered = {{"branching", params_.at("branching")},
               {"depth", params_.at("depth")},
               {"cost_knob", params_.at("cost_knob")}};
  } else if (kind_ == GameKind::nim) {
    ordered.clear();
    auto heaps = nim_heaps();
    for (std::size_t i = 0; i < heaps.size(); ++i) ordered.emplace_back("heap" + std::to_string(i), heaps[i]);
  }
  std::string out = name_ + "{";
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (i) out += ',';
    out += ordered[i].first + "=" + std::to_string(ordered[i].second);
  }
  return out + "}";
}

// Comma-separated game ids; commas inside braces belong to the id:
// "tictactoe,nim{3,4,5}" names two games.
inline std::vector<GameId> parse_game_list(std::string_view text) {
  std::vector<GameId> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    const char c = i < text.size() ? text[i] : ',';
    if (c == '{') ++depth;
    if (c == '}') --depth;
    if (c == ',' && depth == 0) {
      const auto item = detail::trim(text.substr(start, i - start));
      if (!item.empty()) out.push_back(GameId::parse(item));
      start = i + 1;
    }
  }
  if (depth != 0) throw InvalidGame("unbalanced braces in game list: " + std::string(text));
  return out;
}

struct Utilities {
  std::array<double, 2> u{0.0, 0.0};

  double operator[](int player) const { return u[static_cast<std::size_t>(player)]; }
  friend bool operator==(const Utilities&, const Utilities&) = default;
};

struct PlayoutResult {
  Utilities utilities;
  std::uint32_t plies = 0;

  friend bool operator==(const PlayoutResult&, const PlayoutResult&) = default;
};

namespace detail {

// Parameters decoded once per GameId and shared by every state of that game.
struct Rules {
  GameId id;
  GameKind kind;
  int branching = 0;
  int depth = 0;
  std::int64_t cost_knob = 0;
  int size = 0;
  int cells = 0;
  std::vector<int> heaps;

  explicit Rules(GameId g) : id(std::move(g)), kind(id.kind()) {
    switch (kind) {
      case GameKind::synthetic:
        branching = static_cast<int>(id.param("branching"));
        depth = static_cast<int>(id.param("depth"));
        cost_knob = id.param("cost_knob");
        break;
      case GameKind::tictactoe:
        size = 3;
        cells = 9;
        break;
      case GameKind::nim:
        heaps = id.nim_heaps();
        cells = static_cast<int>(heaps.size());
        break;
      case GameKind::breakthrough:
        size = static_cast<int>(id.param("size"));
        cells = size * size;
        break;
    }
  }
};

inline constexpr std::array<std::array<int, 3>, 8> kTicTacToeLines = {{
    {0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {0, 3, 6}, {1, 4, 7}, {2, 5, 8}, {0, 4, 8}, {2, 4, 6},
}};

}  // namespace detail

// A position plus the player to move. Copyable value; no shared mutable state.
class GameState {
 public:
  GameState() = default;

  const GameId& game() const { return rules_->id; }
  int mover() const noexcept { return mover_; }
  std::uint32_t ply_count() const noexcept { return ply_; }

  // Number of legal moves; zero iff the state is terminal.
  std::size_t legal_move_count() const;
  bool is_terminal() const { return legal_move_count() == 0; }
  Utilities utilities() const;
  // Applies the move_index-th legal move in canonical generation order.
  void apply(std::size_t move_index);

  // Byte encoding of the full position, for determinism checks.
  std::string encode() const;

  // Synthetic games only: the SplitMix64 hash of the move-index path.
  std::uint64_t path_hash() const noexcept { return hash_; }

  friend bool operator==(const GameState& a, const GameState& b) {
    return a.rules_->id == b.rules_->id && a.mover_ == b.mover_ && a.ply_ == b.ply_ &&
           a.cells_ == b.cells_ && a.hash_ == b.hash_ && a.work_ == b.work_;
  }

  friend GameState new_trial(const GameId& game);

 private:
  struct Move {
    std::int16_t from;
    std::int16_t to;
  };

  int winner_tictactoe() const;
  // Fills `out` (if non-null) and returns the count.
  std::size_t breakthrough_moves(std::vector<Move>* out) const;
  int breakthrough_goal_winner() const;

  std::shared_ptr<const detail::Rules> rules_;
  std::uint8_t mover_ = 0;
  std::uint32_t ply_ = 0;
  std::array<std::int16_t, kMaxBoardCells> cells_{};
  std::uint64_t hash_ = 0;
  std::uint64_t work_ = 0;
};

inline GameState new_trial(const GameId& game) {
  GameState s;
  s.rules_ = std::make_shared<const detail::Rules>(game);
  const auto& r = *s.rules_;
  switch (r.kind) {
    case GameKind::synthetic:
    case GameKind::tictactoe:
      break;
    case GameKind::nim:
      for (std::size_t i = 0; i < r.heaps.size(); ++i) s.cells_[i] = static_cast<std::int16_t>(r.heaps[i]);
      break;
    case GameKind::breakthrough:
      for (int c = 0; c < r.size; ++c) {
        s.cells_[static_cast<std::size_t>(c)] = 1;
        s.cells_[static_cast<std::size_t>(r.size + c)] = 1;
        s.cells_[static_cast<std::size_t>((r.size - 2) * r.size + c)] = 2;
        s.cells_[static_cast<std::size_t>((r.size - 1) * r.size + c)] = 2;
      }
      break;
  }
  return s;
}

inline int GameState::winner_tictactoe() const {
  for (const auto& line : detail::kTicTacToeLines) {
    auto a = cells_[static_cast<std::size_t>(line[0])];
    if (a != 0 && a == cells_[static_cast<std::size_t>(line[1])] &&
        a == cells_[static_cast<std::size_t>(line[2])]) {
      return a - 1;
    }
  }
  return -1;
}

inline int GameState::breakthrough_goal_winner() const {
  const int n = rules_->size;
  for (int c = 0; c < n; ++c) {
    if (cells_[static_cast<std::size_t>((n - 1) * n + c)] == 1) return 0;
    if (cells_[static_cast<std::size_t>(c)] == 2) return 1;
  }
  return -1;
}

inline std::size_t GameState::breakthrough_moves(std::vector<Move>* out) const {
  const int n = rules_->size;
  const std::int16_t own = static_cast<std::int16_t>(mover_ + 1);
  const int dir = mover_ == 0 ? 1 : -1;
  std::size_t count = 0;
  for (int sq = 0; sq < n * n; ++sq) {
    if (cells_[static_cast<std::size_t>(sq)] != own) continue;
    const int row = sq / n + dir;
    if (row < 0 || row >= n) continue;
    const int col = sq % n;
    for (int dc = -1; dc <= 1; ++dc) {
      const int c = col + dc;
      if (c < 0 || c >= n) continue;
      const int to = row * n + c;
      const auto target = cells_[static_cast<std::size_t>(to)];
      const bool ok = dc == 0 ? target == 0 : target != own;
      if (!ok) continue;
      if (out) out->push_back({static_cast<std::int16_t>(sq), static_cast<std::int16_t>(to)});
      ++count;
    }
  }
  return count;
}

inline std::size_t GameState::legal_move_count() const {
  const auto& r = *rules_;
  switch (r.kind) {
    case GameKind::synthetic:
      return ply_ >= static_cast<std::uint32_t>(r.depth) ? 0 : static_cast<std::size_t>(r.branching);
    case GameKind::tictactoe: {
      if (winner_tictactoe() >= 0) return 0;
      return static_cast<std::size_t>(std::count(cells_.begin(), cells_.begin() + 9, 0));
    }
    case GameKind::nim: {
      std::size_t k = 0;
      for (int i = 0; i < r.cells; ++i) k += static_cast<std::size_t>(cells_[static_cast<std::size_t>(i)]);
      return k;
    }
    case GameKind::breakthrough:
      if (breakthrough_goal_winner() >= 0) return 0;
      return breakthrough_moves(nullptr);
  }
  return 0;
}

inline Utilities GameState::utilities() const {
  if (!is_terminal()) throw NotTerminal("returns requested on a non-terminal state");
  auto win_for = [](int p) { return p == 0 ? Utilities{{1.0, -1.0}} : Utilities{{-1.0, 1.0}}; };
  switch (rules_->kind) {
    case GameKind::synthetic:
      // Published leaf mapping: hash % 4 == 0 draws, otherwise odd hash -> player 0
      // wins and even hash -> player 1 wins.
      if (hash_ % 4 == 0) return Utilities{};
      return win_for((hash_ & 1) ? 0 : 1);
    case GameKind::tictactoe: {
      int w = winner_tictactoe();
      return w < 0 ? Utilities{} : win_for(w);
    }
    case GameKind::nim:
      // Normal play: whoever took the last object (the previous mover) wins.
      return win_for(1 - mover_);
    case GameKind::breakthrough: {
      int w = breakthrough_goal_winner();
      // A side left without moves (including without pieces) loses.
      return win_for(w >= 0 ? w : 1 - mover_);
    }
  }
  return Utilities{};
}

inline void GameState::apply(std::size_t move_index) {
  const auto& r = *rules_;
  const std::size_t k = legal_move_count();
  if (k == 0) throw IllegalMove("move on a terminal state");
  if (move_index >= k) {
    throw IllegalMove("move index " + std::to_string(move_index) + " out of range [0, " +
                      std::to_string(k) + ")");
  }
  switch (r.kind) {
    case GameKind::synthetic: {
      hash_ = SplitMix64(hash_ ^ (move_index + 1)).next();
      SplitMix64 burn(hash_ ^ work_);
      std::uint64_t acc = 0;
      for (std::int64_t i = 0; i < r.cost_knob; ++i) acc ^= burn.next();
      work_ = acc;
      break;
    }
    case GameKind::tictactoe: {
      std::size_t seen = 0;
      for (std::size_t c = 0; c < 9; ++c) {
        if (cells_[c] != 0) continue;
        if (seen++ == move_index) {
          cells_[c] = static_cast<std::int16_t>(mover_ + 1);
          break;
        }
      }
      break;
    }
    case GameKind::nim: {
      std::size_t remaining = move_index;
      for (int i = 0; i < r.cells; ++i) {
        auto& heap = cells_[static_cast<std::size_t>(i)];
        if (remaining < static_cast<std::size_t>(heap)) {
          heap = static_cast<std::int16_t>(heap - static_cast<std::int16_t>(remaining + 1));
          break;
        }
        remaining -= static_cast<std::size_t>(heap);
      }
      break;
    }
    case GameKind::breakthrough: {
      std::vector<Move> moves;
      moves.reserve(k);
      breakthrough_moves(&moves);
      const auto& m = moves[move_index];
      cells_[static_cast<std::size_t>(m.to)] = cells_[static_cast<std::size_t>(m.from)];
      cells_[static_cast<std::size_t>(m.from)] = 0;
      break;
    }
  }
  mover_ ^= 1;
  ++ply_;
}

inline std::string GameState::encode() const {
  std::string out = rules_->id.to_string();
  out += '|';
  out += static_cast<char>('0' + mover_);
  out += '|' + std::to_string(ply_) + '|';
  for (int i = 0; i < std::max(rules_->cells, 0); ++i) out += std::to_string(cells_[static_cast<std::size_t>(i)]) + ',';
  out += '|' + std::to_string(hash_) + '|' + std::to_string(work_);
  return out;
}

inline std::size_t legal_moves(const GameState& s) { return s.legal_move_count(); }

inline GameState apply_move(GameState s, std::size_t move_index) {
  s.apply(move_index);
  return s;
}

inline bool is_terminal(const GameState& s) { return s.is_terminal(); }

inline Utilities returns(const GameState& s) { return s.utilities(); }

// Plays uniformly random moves (next_u64() mod k) on a copy of `s` until a
// terminal state is reached.
inline PlayoutResult random_playout(GameState s, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::uint32_t plies = 0;
  for (std::size_t k = s.legal_move_count(); k != 0; k = s.legal_move_count()) {
    s.apply(static_cast<std::size_t>(rng.below(k)));
    ++plies;
  }
  return {s.utilities(), plies};
}

}  // namespace bridgelab
