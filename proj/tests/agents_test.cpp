#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bridgelab/agents.hpp"
#include "bridgelab/game.hpp"

using namespace bridgelab;

namespace {

// Plain negamax over the full tree, memoized by position.
double oracle_value(const GameState& s, std::map<std::string, double>& memo) {
  if (s.is_terminal()) return s.utilities()[s.mover()];
  const auto key = s.encode();
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.legal_move_count(); ++i) best = std::max(best, -oracle_value(apply_move(s, i), memo));
  memo[key] = best;
  return best;
}

// Non-terminal nodes of the whole tree, i.e. what plain minimax expands.
std::uint64_t full_tree_expansions(const GameState& s) {
  if (s.is_terminal()) return 0;
  std::uint64_t n = 1;
  for (std::size_t i = 0; i < s.legal_move_count(); ++i) n += full_tree_expansions(apply_move(s, i));
  return n;
}

double alphabeta(const GameState& s, MinimaxCounters* counters = nullptr) {
  SearchLimit limit;
  MinimaxCounters local;
  return alphabeta_value(s, -1.0, 1.0, limit, counters ? *counters : local);
}

std::vector<GameState> reachable(const GameId& id) {
  std::set<std::string> seen;
  std::vector<GameState> out, stack{new_trial(id)};
  while (!stack.empty()) {
    auto s = stack.back();
    stack.pop_back();
    if (!seen.insert(s.encode()).second) continue;
    out.push_back(s);
    for (std::size_t i = 0; i < s.legal_move_count(); ++i) stack.push_back(apply_move(s, i));
  }
  return out;
}

// Integer-handle engine over a map, counting live handles and calls. It can
// be told to throw on the n-th call.
struct CountingEngine {
  using Handle = std::uint64_t;

  std::map<std::uint64_t, GameState> table;
  std::uint64_t next = 1;
  std::uint64_t calls = 0;
  std::uint64_t fail_at = 0;

  void tick() {
    if (++calls == fail_at) throw std::runtime_error("injected failure");
  }
  std::uint64_t adopt(GameState s) {
    table.emplace(next, std::move(s));
    return next++;
  }
  Handle copy(const Handle& h) {
    tick();
    return adopt(table.at(h));
  }
  void apply(Handle& h, std::size_t i) {
    tick();
    table.at(h).apply(i);
  }
  std::size_t legal_moves(const Handle& h) {
    tick();
    return table.at(h).legal_move_count();
  }
  Utilities returns(const Handle& h) {
    tick();
    return table.at(h).utilities();
  }
  int current_player(const Handle& h) {
    tick();
    return table.at(h).mover();
  }
  PlayoutResult playout(const Handle& h, std::uint64_t seed) {
    tick();
    return random_playout(table.at(h), seed);
  }
  void release(Handle& h) {
    tick();
    table.erase(h);
  }
};
static_assert(Engine<CountingEngine>);

// Tictactoe positions where the mover has at least one immediate win.
std::vector<std::pair<GameState, std::set<std::size_t>>> win_in_one_positions(std::size_t limit) {
  std::vector<std::pair<GameState, std::set<std::size_t>>> out;
  for (const auto& s : reachable(GameId::parse("tictactoe"))) {
    if (s.is_terminal()) continue;
    std::set<std::size_t> wins;
    for (std::size_t i = 0; i < s.legal_move_count(); ++i) {
      const auto t = apply_move(s, i);
      if (t.is_terminal() && t.utilities()[s.mover()] == 1.0) wins.insert(i);
    }
    if (!wins.empty()) out.emplace_back(s, wins);
    if (out.size() == limit) break;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Alpha-beta

TEST(AlphaBeta, MatchesExhaustiveMinimaxOnEveryTicTacToeState) {
  std::map<std::string, double> memo;
  for (const auto& s : reachable(GameId::parse("tictactoe"))) {
    ASSERT_EQ(alphabeta(s), oracle_value(s, memo)) << s.encode();
  }
}

TEST(AlphaBeta, TicTacToeIsADraw) { EXPECT_EQ(alphabeta(new_trial(GameId::parse("tictactoe"))), 0.0); }

TEST(AlphaBeta, NimFollowsXorRule) {
  for (int a = 1; a <= 3; ++a) {
    for (int b = 1; b <= 4; ++b) {
      const auto s = new_trial(GameId("nim", {{"heap0", a}, {"heap1", b}}));
      EXPECT_EQ(alphabeta(s), (a ^ b) ? 1.0 : -1.0) << a << "," << b;
      for (const auto& t : reachable(s.game())) {
        std::map<std::string, double> memo;
        ASSERT_EQ(alphabeta(t), oracle_value(t, memo));
      }
    }
  }
}

TEST(AlphaBeta, SyntheticMatchesOracleAndNeverExpandsMore) {
  for (int b = 1; b <= 3; ++b) {
    for (int d = 1; d <= 5; ++d) {
      const auto root = new_trial(GameId("synthetic", {{"branching", b}, {"depth", d}}));
      std::map<std::string, double> memo;
      MinimaxCounters counters;
      EXPECT_EQ(alphabeta(root, &counters), oracle_value(root, memo));
      const auto plain = full_tree_expansions(root);
      EXPECT_EQ(plain, b == 1 ? static_cast<std::uint64_t>(d)
                              : static_cast<std::uint64_t>((std::pow(b, d) - 1) / (b - 1)));
      EXPECT_LE(counters.expansions, plain);
    }
  }
}

TEST(AlphaBeta, PlainMinimaxExpandsTheWholeTree) {
  for (const char* g : {"tictactoe", "nim{3,4}", "synthetic{branching=3,depth=5}"}) {
    const auto root = new_trial(GameId::parse(g));
    std::map<std::string, double> memo;
    MinimaxCounters plain, pruned;
    EXPECT_EQ(minimax_value(root, plain), oracle_value(root, memo)) << g;
    EXPECT_EQ(plain.expansions, full_tree_expansions(root)) << g;
    alphabeta(root, &pruned);
    EXPECT_LT(pruned.expansions, plain.expansions) << g;
  }
}

TEST(AlphaBeta, WindowSemanticsAreFailSoft) {
  const auto s = new_trial(GameId::parse("nim{1,2}"));  // a first-player win
  SearchLimit limit;
  MinimaxCounters c;
  EXPECT_GE(alphabeta_value(s, -1.0, 0.5, limit, c), 0.5);
  EXPECT_THROW(alphabeta_value(s, 0.0, 0.0, limit, c), std::invalid_argument);
}

TEST(AlphaBeta, InterruptedSubtreesCountAsDraws) {
  auto limit = SearchLimit::expired();
  MinimaxCounters c;
  EXPECT_EQ(alphabeta_value(new_trial(GameId::parse("nim{1,2}")), -1.0, 1.0, limit, c), 0.0);
  EXPECT_EQ(c.expansions, 0u);
}

// ---------------------------------------------------------------------------
// Minimax agent

TEST(Minimax, SingleMoveNim) {
  const auto r = minimax_select_move(new_trial(GameId::parse("nim{1}")), SearchBudget::unlimited());
  EXPECT_EQ(r.move_index, 0u);
  EXPECT_EQ(r.expansions, 1u);
}

TEST(Minimax, FindsTheWinningNimMove) {
  // [1,2]: only taking one from the second heap leaves a zero xor.
  const auto r = minimax_select_move(new_trial(GameId::parse("nim{1,2}")), SearchBudget::unlimited());
  EXPECT_EQ(r.move_index, 1u);
}

TEST(Minimax, ExpansionCapIsRespected) {
  const auto root = new_trial(GameId::parse("breakthrough{size=6}"));
  for (std::uint64_t cap : {1u, 2u, 10u, 500u}) {
    const auto r = minimax_select_move(root, SearchBudget::iterations(cap));
    EXPECT_EQ(r.expansions, cap);
  }
}

// With a win on the board, minimax may pick an earlier move that also wins
// by force; either way the chosen child is lost for the opponent.
TEST(Minimax, KeepsAWonPositionWon) {
  std::map<std::string, double> memo;
  for (const auto& [s, wins] : win_in_one_positions(40)) {
    const auto m = minimax_select_move(s, SearchBudget::unlimited()).move_index;
    EXPECT_EQ(oracle_value(apply_move(s, m), memo), -1.0) << s.encode();
  }
}

TEST(Minimax, WallBudgetStops) {
  const auto root = new_trial(GameId::parse("breakthrough{size=8}"));
  const auto r = minimax_select_move(root, SearchBudget::wall(50));
  EXPECT_LT(r.elapsed, 1.0);
  EXPECT_GT(r.expansions, 1u);
}

// ---------------------------------------------------------------------------
// UCT

TEST(Ucb1, Formula) {
  EXPECT_TRUE(std::isinf(ucb1(0.0, 0, 10, 1.0)));
  EXPECT_DOUBLE_EQ(ucb1(0.5, 4, 16, 2.0), 0.5 + 2.0 * std::sqrt(std::log(16.0) / 4.0));
  EXPECT_DOUBLE_EQ(ucb1(0.25, 3, 1, kDefaultExploration), 0.25);
}

TEST(Uct, PlayoutsEqualIterations) {
  for (std::uint64_t n : {1u, 7u, 100u, 1000u}) {
    const auto r = uct_select_move(new_trial(GameId::parse("tictactoe")), SearchBudget::iterations(n), 3);
    EXPECT_EQ(r.playouts, n);
    EXPECT_EQ(r.expansions, 0u);
  }
}

TEST(Uct, SameSeedSameDecision) {
  const auto root = new_trial(GameId::parse("breakthrough"));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto a = uct_select_move(root, SearchBudget::iterations(300), seed);
    const auto b = uct_select_move(root, SearchBudget::iterations(300), seed);
    EXPECT_TRUE(a.same_decision(b));
  }
}

TEST(Uct, TreeAccounting) {
  NativeEngine engine;
  for (const char* g : {"tictactoe", "nim{3,4,5}", "synthetic{branching=3,depth=4}"}) {
    UctTree tree;
    const auto root = new_trial(GameId::parse(g));
    uct_select_move(engine, root, SearchBudget::iterations(2000), 11, kDefaultExploration, &tree);
    std::uint64_t root_children = 0;
    for (auto c : tree.root().children) root_children += tree.nodes[c].visits;
    EXPECT_EQ(tree.root().visits, 2000u);
    EXPECT_EQ(root_children, 2000u) << g;
    for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
      const auto& n = tree.nodes[i];
      EXPECT_GE(n.reward_sum, 0.0);
      EXPECT_LE(n.reward_sum, static_cast<double>(n.visits));
      if (n.visits == 0 || n.children.empty()) continue;
      std::uint64_t below = 0;
      for (auto c : n.children) below += tree.nodes[c].visits;
      EXPECT_EQ(n.visits, below + 1) << g;  // the first visit ended at this node
    }
  }
}

TEST(Uct, TakesWinInOne) {
  for (const auto& [s, wins] : win_in_one_positions(10)) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      EXPECT_TRUE(wins.count(uct_select_move(s, SearchBudget::iterations(5000), seed).move_index));
    }
  }
}

TEST(Uct, WallBudgetRunsAtLeastOnce) {
  EXPECT_THROW(SearchBudget::wall(0), std::invalid_argument);
  const auto r = uct_select_move(new_trial(GameId::parse("tictactoe")), SearchBudget::wall(1), 1);
  EXPECT_GE(r.playouts, 1u);
  const auto w = uct_select_move(new_trial(GameId::parse("tictactoe")), SearchBudget::wall(30), 1);
  EXPECT_GT(w.playouts, 1u);
  EXPECT_LT(w.elapsed, 1.0);
}

TEST(Agents, TerminalRootIsAnError) {
  auto s = new_trial(GameId::parse("nim{1}"));
  s.apply(0);
  EXPECT_THROW(uct_select_move(s, SearchBudget::iterations(10), 0), SearchError);
  EXPECT_THROW(minimax_select_move(s, SearchBudget::iterations(10)), SearchError);
}

// ---------------------------------------------------------------------------
// Engine-generic behaviour

TEST(Agents, HandleEngineGivesNativeDecisions) {
  for (const char* g : {"tictactoe", "nim{3,4,5}", "breakthrough"}) {
    const auto root = new_trial(GameId::parse(g));
    for (auto alg : {Algorithm::uct, Algorithm::minimax}) {
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        CountingEngine e;
        const auto h = e.adopt(root);
        NativeEngine n;
        const auto a = select_move(e, alg, h, SearchBudget::iterations(500), seed);
        const auto b = select_move(n, alg, root, SearchBudget::iterations(500), seed);
        EXPECT_TRUE(a.same_decision(b)) << g;
        EXPECT_EQ(e.table.size(), 1u);  // only the root remains
      }
    }
  }
}

TEST(Agents, UctMakesOnePlayoutCallPerIteration) {
  struct PlayoutCounter : CountingEngine {
    std::uint64_t playouts = 0;
    PlayoutResult playout(const Handle& h, std::uint64_t seed) {
      ++playouts;
      return CountingEngine::playout(h, seed);
    }
  };
  PlayoutCounter e;
  const auto h = e.adopt(new_trial(GameId::parse("tictactoe")));
  uct_select_move(e, h, SearchBudget::iterations(777), 5);
  EXPECT_EQ(e.playouts, 777u);
}

TEST(Agents, HandlesAreReleasedWhenTheEngineFails) {
  const auto root = new_trial(GameId::parse("tictactoe"));
  for (auto alg : {Algorithm::uct, Algorithm::minimax}) {
    for (std::uint64_t fail_at : {5u, 17u, 123u}) {
      CountingEngine e;
      const auto h = e.adopt(root);
      e.fail_at = fail_at;
      EXPECT_THROW(select_move(e, alg, h, SearchBudget::iterations(1000), 1), std::runtime_error);
      EXPECT_EQ(e.table.size(), 1u);
    }
  }
}

TEST(Agents, MinimaxCallDecompositionIsPinned) {
  // Root: legal_moves + current_player. Every other visited node: copy, apply,
  // legal_moves, release, plus returns when it is terminal. With m expansions
  // and T terminal evaluations: calls = 4m + 5T - 2.
  struct ReturnCounter : CountingEngine {
    std::uint64_t terminals = 0;
    Utilities returns(const Handle& h) {
      ++terminals;
      return CountingEngine::returns(h);
    }
  };
  for (const char* g : {"tictactoe", "nim{3,4,5}", "synthetic{branching=3,depth=5}"}) {
    ReturnCounter e;
    const auto h = e.adopt(new_trial(GameId::parse(g)));
    const auto r = minimax_select_move(e, h, SearchBudget::unlimited());
    EXPECT_EQ(e.calls, 4 * r.expansions + 5 * e.terminals - 2) << g;
  }
}
