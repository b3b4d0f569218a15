#include <gtest/gtest.h>

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "bridgelab/game.hpp"
#include "bridgelab/rng.hpp"

using namespace bridgelab;

namespace {

// Textbook SplitMix64, written out independently of the library.
std::uint64_t splitmix_step(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t oracle_path_hash(const std::vector<std::size_t>& path) {
  std::uint64_t h = 0;
  for (auto m : path) {
    std::uint64_t x = h ^ (m + 1);
    h = splitmix_step(x);
  }
  return h;
}

GameState play(const char* game, std::initializer_list<std::size_t> moves) {
  auto s = new_trial(GameId::parse(game));
  for (auto m : moves) s.apply(m);
  return s;
}

}  // namespace

TEST(SplitMix64, KnownOutputsForSeedZero) {
  SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xE220A8397B1DCDAFull);
  EXPECT_EQ(rng.next(), 0x6E789E6AA1B965F4ull);
}

TEST(SplitMix64, MatchesIndependentImplementation) {
  for (std::uint64_t seed : {1ull, 42ull, 0xDEADBEEFull, ~0ull}) {
    SplitMix64 rng(seed);
    std::uint64_t x = seed;
    for (int i = 0; i < 100; ++i) ASSERT_EQ(rng.next(), splitmix_step(x));
  }
}

TEST(SplitMix64, BelowIsModulo) {
  SplitMix64 a(9), b(9);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(a.below(7), b.next() % 7);
}

TEST(GameId, ParsesAndPrintsCanonically) {
  EXPECT_EQ(GameId::parse("nim{3,4,5}"), GameId::parse("nim{heap0=3,heap1=4,heap2=5}"));
  EXPECT_EQ(GameId::parse("nim").to_string(), "nim{heap0=3,heap1=4,heap2=5}");
  EXPECT_EQ(GameId::parse("synthetic{depth:7, branching=2}").to_string(),
            "synthetic{branching=2,depth=7,cost_knob=1}");
  EXPECT_EQ(GameId::parse("tictactoe").to_string(), "tictactoe");
  EXPECT_EQ(GameId::parse("breakthrough").param("size"), 5);
  for (const char* text : {"synthetic{branching=3,depth=4,cost_knob=10}", "nim{heap0=1}", "breakthrough{size=6}"}) {
    EXPECT_EQ(GameId::parse(text).to_string(), text);
  }
}

TEST(GameId, RejectsBadInput) {
  EXPECT_THROW(GameId::parse("chess"), InvalidGame);
  EXPECT_THROW(GameId::parse("synthetic{branching=0}"), InvalidGame);
  EXPECT_THROW(GameId::parse("synthetic{depth=65}"), InvalidGame);
  EXPECT_THROW(GameId::parse("synthetic{colour=1}"), InvalidGame);
  EXPECT_THROW(GameId::parse("tictactoe{size=3}"), InvalidGame);
  EXPECT_THROW(GameId::parse("breakthrough{size=9}"), InvalidGame);
  EXPECT_THROW(GameId::parse("nim{0}"), InvalidGame);
  EXPECT_THROW(GameId::parse("nim{3,4"), InvalidGame);
  EXPECT_THROW(GameId::parse("synthetic{branching=2,branching=3}"), InvalidGame);
  EXPECT_THROW(GameId::parse("synthetic{branching=x}"), InvalidGame);
}

TEST(GameId, ListSplitsOutsideBraces) {
  const auto games = parse_game_list("tictactoe, nim{3,4,5},synthetic{branching=2,depth=3}");
  ASSERT_EQ(games.size(), 3u);
  EXPECT_EQ(games[1], GameId::parse("nim{3,4,5}"));
  EXPECT_TRUE(parse_game_list("").empty());
  EXPECT_THROW(parse_game_list("nim{3,4"), InvalidGame);
}

TEST(Synthetic, UniformTreeShape) {
  auto s = new_trial(GameId::parse("synthetic{branching=4,depth=3}"));
  for (int ply = 0; ply < 3; ++ply) {
    EXPECT_EQ(s.legal_move_count(), 4u);
    EXPECT_EQ(s.mover(), ply % 2);
    s.apply(static_cast<std::size_t>(ply));
  }
  EXPECT_TRUE(s.is_terminal());
  EXPECT_EQ(s.legal_move_count(), 0u);
}

TEST(Synthetic, LeafValuesFollowPathHash) {
  const auto id = GameId::parse("synthetic{branching=3,depth=3,cost_knob=5}");
  int draws = 0, p0 = 0, p1 = 0;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      for (std::size_t c = 0; c < 3; ++c) {
        auto s = new_trial(id);
        s.apply(a);
        s.apply(b);
        s.apply(c);
        const auto h = oracle_path_hash({a, b, c});
        ASSERT_EQ(s.path_hash(), h);
        const auto u = s.utilities();
        if (h % 4 == 0) {
          EXPECT_EQ(u, Utilities{});
          ++draws;
        } else if (h & 1) {
          EXPECT_EQ(u, (Utilities{{1.0, -1.0}}));
          ++p0;
        } else {
          EXPECT_EQ(u, (Utilities{{-1.0, 1.0}}));
          ++p1;
        }
      }
    }
  }
  EXPECT_EQ(draws + p0 + p1, 27);
}

TEST(Synthetic, CostKnobDoesNotChangeTheTree) {
  auto cheap = new_trial(GameId::parse("synthetic{branching=2,depth=5,cost_knob=1}"));
  auto dear = new_trial(GameId::parse("synthetic{branching=2,depth=5,cost_knob=1000}"));
  for (std::size_t m : {1u, 0u, 1u, 1u, 0u}) {
    cheap.apply(m);
    dear.apply(m);
  }
  EXPECT_EQ(cheap.path_hash(), dear.path_hash());
  EXPECT_EQ(cheap.utilities(), dear.utilities());
}

TEST(Synthetic, PlayoutExample) {
  const auto r = random_playout(new_trial(GameId::parse("synthetic{branching=2,depth=3}")), 42);
  EXPECT_EQ(r.plies, 3u);
  EXPECT_EQ(r.utilities[0] + r.utilities[1], 0.0);
}

TEST(TicTacToe, MovesAreEmptyCellsInOrder) {
  auto s = new_trial(GameId::parse("tictactoe"));
  EXPECT_EQ(s.legal_move_count(), 9u);
  s.apply(4);  // X takes the centre
  EXPECT_EQ(s.legal_move_count(), 8u);
  s.apply(4);  // fifth empty cell is now cell 5
  auto t = new_trial(GameId::parse("tictactoe"));
  t.apply(4);
  t.apply(4);
  EXPECT_EQ(s, t);
  EXPECT_EQ(s.mover(), 0);
}

TEST(TicTacToe, WinsAndDraws) {
  // X: 0,1,2 along the top row; O: 3,4.
  auto x_wins = play("tictactoe", {0, 2, 0, 1, 0});
  ASSERT_TRUE(x_wins.is_terminal());
  EXPECT_EQ(x_wins.utilities(), (Utilities{{1.0, -1.0}}));

  // X O X / X O O / O X X : full board, no line.
  // Cells in play order: X0 O1 X2 O4 X3 O5 X7 O6 X8.
  auto draw = play("tictactoe", {0, 0, 0, 1, 0, 0, 1, 0, 0});
  ASSERT_TRUE(draw.is_terminal());
  EXPECT_EQ(draw.utilities(), Utilities{});
  EXPECT_THROW(new_trial(GameId::parse("tictactoe")).utilities(), NotTerminal);
  EXPECT_THROW(new_trial(GameId::parse("tictactoe")).apply(9), IllegalMove);
}

TEST(Nim, MoveOrderingAndNormalPlay) {
  auto s = new_trial(GameId::parse("nim{2,3}"));
  EXPECT_EQ(s.legal_move_count(), 5u);
  s.apply(3);  // heap1 take 2
  EXPECT_EQ(s.legal_move_count(), 3u);
  // Normal play: whoever takes the last object wins.
  auto u = new_trial(GameId::parse("nim{1}"));
  u.apply(0);
  ASSERT_TRUE(u.is_terminal());
  EXPECT_EQ(u.utilities(), (Utilities{{1.0, -1.0}}));
}

TEST(Breakthrough, OpeningAndCaptures) {
  auto s = new_trial(GameId::parse("breakthrough{size=5}"));
  // Front-row pawns: the middle ones have three moves, the edge ones two.
  EXPECT_EQ(s.legal_move_count(), 3u * 3u + 2u * 2u);
  // On 4x4 the armies start in contact: straight moves are blocked and only
  // diagonal captures remain.
  auto small = new_trial(GameId::parse("breakthrough{size=4}"));
  EXPECT_EQ(small.legal_move_count(), 2u * 2u + 2u * 1u);
}

TEST(GameProperties, RandomPlayoutsTerminateAndAreZeroSum) {
  for (const char* g : {"tictactoe", "nim{3,4,5}", "synthetic{branching=5,depth=9,cost_knob=3}", "breakthrough",
                        "breakthrough{size=8}"}) {
    const auto root = new_trial(GameId::parse(g));
    SplitMix64 seeds(7);
    for (int i = 0; i < 200; ++i) {
      auto s = root;
      SplitMix64 rng(seeds.next());
      std::uint32_t plies = 0;
      while (!s.is_terminal()) {
        const auto k = s.legal_move_count();
        ASSERT_GT(k, 0u);
        s.apply(static_cast<std::size_t>(rng.below(k)));
        ASSERT_LT(++plies, 1000u) << g;
      }
      const auto u = s.utilities();
      EXPECT_EQ(u[0] + u[1], 0.0) << g;
      EXPECT_TRUE(u[0] == 0.0 || u[0] == 1.0 || u[0] == -1.0);
    }
  }
}

TEST(GameProperties, RandomPlayoutIsDeterministicAndMatchesManualPlay) {
  const auto root = new_trial(GameId::parse("breakthrough{size=6}"));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = random_playout(root, seed);
    const auto b = random_playout(root, seed);
    EXPECT_EQ(a.utilities, b.utilities);
    EXPECT_EQ(a.plies, b.plies);
    auto s = root;
    SplitMix64 rng(seed);
    std::uint32_t plies = 0;
    while (!s.is_terminal()) {
      s.apply(static_cast<std::size_t>(rng.next() % s.legal_move_count()));
      ++plies;
    }
    EXPECT_EQ(a.plies, plies);
    EXPECT_EQ(a.utilities, s.utilities());
  }
}

TEST(GameProperties, CopiesAreIndependent) {
  auto a = new_trial(GameId::parse("nim{3,4,5}"));
  auto b = a;
  b.apply(0);
  EXPECT_EQ(a.legal_move_count(), 12u);
  EXPECT_EQ(b.legal_move_count(), 11u);
  EXPECT_NE(a, b);
}

TEST(TicTacToe, ReachableStateCount) {
  // 5478 distinct legal positions are reachable from the empty board.
  std::set<std::string> seen;
  std::vector<GameState> stack{new_trial(GameId::parse("tictactoe"))};
  while (!stack.empty()) {
    auto s = stack.back();
    stack.pop_back();
    if (!seen.insert(s.encode()).second) continue;
    for (std::size_t i = 0; i < s.legal_move_count(); ++i) stack.push_back(apply_move(s, i));
  }
  EXPECT_EQ(seen.size(), 5478u);
}
