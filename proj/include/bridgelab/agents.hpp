#pragma once

// UCT (UCB1 tree policy, random playouts) and anytime alpha-beta minimax
// without a heuristic. Both are deterministic under an iteration budget.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bridgelab/engine.hpp"
#include "bridgelab/rng.hpp"

namespace bridgelab {

enum class Algorithm { uct, minimax };

inline std::string_view to_string(Algorithm a) { return a == Algorithm::uct ? "uct" : "minimax"; }

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "uct") return Algorithm::uct;
  if (s == "minimax") return Algorithm::minimax;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "' (expected uct|minimax)");
}

inline const double kDefaultExploration = std::sqrt(2.0);

// Exactly one of a wall-clock limit or an iteration limit. For UCT an
// iteration is one select/expand/simulate/backpropagate cycle; for minimax it
// is one node expansion.
class SearchBudget {
 public:
  static SearchBudget wall(std::int64_t ms) {
    if (ms <= 0) throw std::invalid_argument("wall budget must be positive");
    SearchBudget b;
    b.wall_ms_ = ms;
    return b;
  }
  static SearchBudget iterations(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("iteration budget must be positive");
    SearchBudget b;
    b.max_iterations_ = n;
    return b;
  }
  static SearchBudget unlimited() { return iterations(std::numeric_limits<std::uint64_t>::max()); }

  bool is_wall() const noexcept { return wall_ms_.has_value(); }
  std::int64_t wall_ms() const { return wall_ms_.value(); }
  std::uint64_t max_iterations() const { return max_iterations_.value(); }

  friend bool operator==(const SearchBudget&, const SearchBudget&) = default;

 private:
  SearchBudget() = default;
  std::optional<std::int64_t> wall_ms_;
  std::optional<std::uint64_t> max_iterations_;
};

struct SearchResult {
  std::size_t move_index = 0;
  std::uint64_t playouts = 0;    // UCT
  std::uint64_t expansions = 0;  // minimax
  double elapsed = 0.0;          // seconds

  std::uint64_t counter(Algorithm a) const { return a == Algorithm::uct ? playouts : expansions; }

  // Decision-level equality: timing is excluded.
  bool same_decision(const SearchResult& o) const {
    return move_index == o.move_index && playouts == o.playouts && expansions == o.expansions;
  }
};

class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double ucb1(double mean, std::uint64_t child_visits, std::uint64_t parent_visits, double c) {
  if (child_visits == 0) return std::numeric_limits<double>::infinity();
  return mean + c * std::sqrt(std::log(static_cast<double>(parent_visits)) / static_cast<double>(child_visits));
}

// ---------------------------------------------------------------------------
// UCT

struct UctNode {
  std::uint64_t visits = 0;
  double reward_sum = 0.0;  // from the perspective of the player who moved into the node
  std::int64_t move_count = -1;  // -1 until queried; 0 means terminal
  std::vector<std::uint32_t> children;  // children[i] is reached by move index i
};

// The tree a UCT search leaves behind, exposed for the accounting invariants.
struct UctTree {
  std::vector<UctNode> nodes;
  const UctNode& root() const { return nodes.front(); }
};

namespace detail {

inline std::size_t most_visited_child(const UctTree& tree) {
  const auto& root = tree.root();
  std::size_t best = 0;
  std::uint64_t best_visits = 0;
  for (std::size_t i = 0; i < root.children.size(); ++i) {
    auto v = tree.nodes[root.children[i]].visits;
    if (v > best_visits) {
      best_visits = v;
      best = i;
    }
  }
  return best;
}

}  // namespace detail

// Root children are all created before the first iteration. Each iteration
// descends by UCB1 (ties to the lowest move index), stops at the first
// unvisited node, runs one host-side playout from it and backs up
// (u[p] + 1) / 2 where p is the player who moved into each node.
template <Engine E>
SearchResult uct_select_move(E& engine, const typename E::Handle& root, const SearchBudget& budget,
                             std::uint64_t seed, double c = kDefaultExploration,
                             UctTree* tree_out = nullptr) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto root_moves = engine.legal_moves(root);
  if (root_moves == 0) throw SearchError("select_move called on a terminal state");
  const int root_player = engine.current_player(root);

  UctTree tree;
  tree.nodes.reserve(1024);
  tree.nodes.emplace_back();
  tree.nodes[0].move_count = static_cast<std::int64_t>(root_moves);
  for (std::size_t i = 0; i < root_moves; ++i) {
    tree.nodes[0].children.push_back(static_cast<std::uint32_t>(tree.nodes.size()));
    tree.nodes.emplace_back();
  }

  SplitMix64 seeds(seed);
  const bool wall = budget.is_wall();
  const auto deadline = wall ? start + std::chrono::milliseconds(budget.wall_ms()) : clock::time_point::max();
  const std::uint64_t max_iterations = wall ? std::numeric_limits<std::uint64_t>::max() : budget.max_iterations();

  std::vector<std::uint32_t> path;
  std::uint64_t iterations = 0;
  do {
    path.assign(1, 0);
    ScopedHandle<E> state(engine, engine.copy(root));
    std::uint32_t node = 0;
    for (;;) {
      if (node != 0 && tree.nodes[node].visits == 0) break;
      if (tree.nodes[node].move_count < 0) {
        tree.nodes[node].move_count = static_cast<std::int64_t>(engine.legal_moves(state.get()));
      }
      const auto k = static_cast<std::size_t>(tree.nodes[node].move_count);
      if (k == 0) break;
      std::size_t chosen;
      if (tree.nodes[node].children.size() < k) {
        chosen = tree.nodes[node].children.size();
        const auto child = static_cast<std::uint32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[node].children.push_back(child);
      } else {
        const auto& parent = tree.nodes[node];
        chosen = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < k; ++i) {
          const auto& ch = tree.nodes[parent.children[i]];
          const double mean = ch.visits ? ch.reward_sum / static_cast<double>(ch.visits) : 0.0;
          const double score = ucb1(mean, ch.visits, parent.visits, c);
          if (score > best) {
            best = score;
            chosen = i;
          }
        }
      }
      engine.apply(state.get(), chosen);
      node = tree.nodes[node].children[chosen];
      path.push_back(node);
    }

    const auto outcome = engine.playout(state.get(), seeds.next());
    for (std::size_t depth = 0; depth < path.size(); ++depth) {
      auto& n = tree.nodes[path[depth]];
      ++n.visits;
      if (depth == 0) continue;
      const int moved_in_by = root_player ^ static_cast<int>((depth - 1) & 1);
      n.reward_sum += (outcome.utilities[moved_in_by] + 1.0) / 2.0;
    }
    ++iterations;
  } while (iterations < max_iterations && (!wall || clock::now() < deadline));

  SearchResult result;
  result.move_index = detail::most_visited_child(tree);
  result.playouts = tree.root().visits;
  result.elapsed = std::chrono::duration<double>(clock::now() - start).count();
  if (tree_out) *tree_out = std::move(tree);
  return result;
}

inline SearchResult uct_select_move(const GameState& s, const SearchBudget& budget, std::uint64_t seed,
                                    double c = kDefaultExploration) {
  NativeEngine engine;
  return uct_select_move(engine, s, budget, seed, c);
}

// ---------------------------------------------------------------------------
// Minimax

struct MinimaxCounters {
  std::uint64_t expansions = 0;
};

// Stop condition shared by a whole minimax search: an optional wall deadline
// (checked once per node) and an optional cap on expansions.
class SearchLimit {
 public:
  using clock = std::chrono::steady_clock;

  SearchLimit() = default;
  static SearchLimit from_budget(const SearchBudget& b, clock::time_point start) {
    SearchLimit l;
    if (b.is_wall()) {
      l.deadline_ = start + std::chrono::milliseconds(b.wall_ms());
    } else {
      l.max_expansions_ = b.max_iterations();
    }
    return l;
  }
  static SearchLimit expired() {
    SearchLimit l;
    l.hit_ = true;
    return l;
  }

  // Re-evaluates the limit; called on entering a node.
  bool check(const MinimaxCounters& c) {
    if (!hit_) hit_ = c.expansions >= max_expansions_ || (deadline_ && clock::now() >= *deadline_);
    return hit_;
  }
  bool hit() const noexcept { return hit_; }

 private:
  std::optional<clock::time_point> deadline_;
  std::uint64_t max_expansions_ = std::numeric_limits<std::uint64_t>::max();
  bool hit_ = false;
};

namespace detail {

// Fail-soft negamax. Values are from `mover`'s perspective; anything the
// limit prevents us from evaluating counts as a draw.
template <Engine E>
double negamax(E& engine, const typename E::Handle& s, int mover, double alpha, double beta, SearchLimit& limit,
               MinimaxCounters& counters) {
  if (limit.check(counters)) return 0.0;
  const std::size_t k = engine.legal_moves(s);
  if (k == 0) return engine.returns(s)[mover];
  ++counters.expansions;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    double v = 0.0;
    if (!limit.hit()) {
      ScopedHandle<E> child(engine, engine.copy(s));
      engine.apply(child.get(), i);
      v = -negamax(engine, child.get(), mover ^ 1, -beta, -alpha, limit, counters);
    }
    if (v > best) best = v;
    if (best > alpha) alpha = best;
    if (alpha >= beta) break;
  }
  return best;
}

}  // namespace detail

template <Engine E>
double alphabeta_value(E& engine, const typename E::Handle& s, double alpha, double beta, SearchLimit& limit,
                       MinimaxCounters& counters) {
  if (!(alpha < beta)) throw std::invalid_argument("alphabeta_value requires alpha < beta");
  return detail::negamax(engine, s, engine.current_player(s), alpha, beta, limit, counters);
}

inline double alphabeta_value(const GameState& s, double alpha, double beta, SearchLimit& limit,
                              MinimaxCounters& counters) {
  NativeEngine engine;
  return alphabeta_value(engine, s, alpha, beta, limit, counters);
}

// Unpruned negamax: the baseline alpha-beta is measured against. Counts
// expansions the same way.
template <Engine E>
double minimax_value(E& engine, const typename E::Handle& s, MinimaxCounters& counters) {
  const std::size_t k = engine.legal_moves(s);
  const int mover = engine.current_player(s);
  if (k == 0) return engine.returns(s)[mover];
  ++counters.expansions;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    ScopedHandle<E> child(engine, engine.copy(s));
    engine.apply(child.get(), i);
    best = std::max(best, -minimax_value(engine, child.get(), counters));
  }
  return best;
}

inline double minimax_value(const GameState& s, MinimaxCounters& counters) {
  NativeEngine engine;
  return minimax_value(engine, s, counters);
}

// Evaluates root children left to right; returns the first child with the
// highest value. The seed is unused.
template <Engine E>
SearchResult minimax_select_move(E& engine, const typename E::Handle& root, const SearchBudget& budget,
                                 std::uint64_t /*seed*/ = 0) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const std::size_t k = engine.legal_moves(root);
  if (k == 0) throw SearchError("select_move called on a terminal state");
  const int mover = engine.current_player(root);

  MinimaxCounters counters;
  counters.expansions = 1;
  auto limit = SearchLimit::from_budget(budget, start);

  double alpha = -1.0;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < k && best < 1.0; ++i) {
    double v = 0.0;
    if (!limit.check(counters)) {
      ScopedHandle<E> child(engine, engine.copy(root));
      engine.apply(child.get(), i);
      v = -detail::negamax(engine, child.get(), mover ^ 1, -1.0, -alpha, limit, counters);
    }
    if (v > best) {
      best = v;
      best_index = i;
    }
    if (best > alpha) alpha = best;
  }

  SearchResult result;
  result.move_index = best_index;
  result.expansions = counters.expansions;
  result.elapsed = std::chrono::duration<double>(clock::now() - start).count();
  return result;
}

inline SearchResult minimax_select_move(const GameState& s, const SearchBudget& budget, std::uint64_t seed = 0) {
  NativeEngine engine;
  return minimax_select_move(engine, s, budget, seed);
}

template <Engine E>
SearchResult select_move(E& engine, Algorithm algorithm, const typename E::Handle& root, const SearchBudget& budget,
                         std::uint64_t seed, double c = kDefaultExploration) {
  return algorithm == Algorithm::uct ? uct_select_move(engine, root, budget, seed, c)
                                     : minimax_select_move(engine, root, budget, seed);
}

}  // namespace bridgelab
