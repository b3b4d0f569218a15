#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <functional>
#include <numeric>

#include "bridgelab/backend.hpp"
#include "bridgelab/bench.hpp"

using namespace bridgelab;

namespace {

// Expected plies and visited-state statistics of uniform random play,
// computed exactly by recursion over the game tree.
struct RandomPlayStats {
  double plies = 0.0;
  double visited = 0.0;  // expected number of non-terminal states visited
  double moves = 0.0;    // expected sum of legal-move counts over them
};

RandomPlayStats exact_random_play(const GameState& s) {
  const auto k = s.legal_move_count();
  if (k == 0) return {};
  RandomPlayStats acc;
  for (std::size_t i = 0; i < k; ++i) {
    auto c = s;
    c.apply(i);
    const auto sub = exact_random_play(c);
    acc.plies += sub.plies;
    acc.visited += sub.visited;
    acc.moves += sub.moves;
  }
  const double w = 1.0 / static_cast<double>(k);
  return {1.0 + acc.plies * w, 1.0 + acc.visited * w, static_cast<double>(k) + acc.moves * w};
}

// Returns a scripted counter value per call and records what it was asked.
class ScriptedBackend final : public Backend {
 public:
  std::function<std::uint64_t(const SearchBudget&)> count;
  std::vector<SearchBudget> budgets;
  std::vector<std::uint64_t> seeds;

  BackendKind kind() const override { return BackendKind::native; }

 protected:
  SearchResult do_select_move(Algorithm a, const GameState&, const SearchBudget& budget, std::uint64_t seed,
                              double) override {
    budgets.push_back(budget);
    seeds.push_back(seed);
    SearchResult r;
    (a == Algorithm::uct ? r.playouts : r.expansions) = count(budget);
    return r;
  }
};

}  // namespace

TEST(Stats, ZScoresAreTheTabulatedQuantiles) {
  // Two-sided normal quantiles, rounded as in the usual tables.
  EXPECT_NEAR(z_score(0.99), 2.5758293035489, 5e-4);
  EXPECT_NEAR(z_score(0.95), 1.9599639845401, 5e-4);
  EXPECT_THROW(z_score(0.9), std::invalid_argument);
}

TEST(Stats, ConfidenceIntervalMatchesHandComputation) {
  const std::vector<double> xs = {10, 12, 14, 16, 18};
  const auto ci = confidence_interval(xs);
  // Sample stddev of 10..18 step 2 is sqrt(10).
  EXPECT_DOUBLE_EQ(ci.mean, 14.0);
  EXPECT_NEAR(ci.half_width, z_score(0.99) * std::sqrt(10.0) / std::sqrt(5.0), 1e-12);
}

TEST(Stats, SummarizeNormalizesByBudget) {
  BenchRecord r;
  r.budget_s = 0.5;
  r.raw_counts = {100, 110, 90, 100};
  summarize(r);
  EXPECT_EQ(r.trials, 4u);
  EXPECT_DOUBLE_EQ(r.normalized_mean, 200.0);
  const std::vector<double> per_s = {200, 220, 180, 200};
  const double mean = 200.0;
  double ss = 0;
  for (double v : per_s) ss += (v - mean) * (v - mean);
  EXPECT_NEAR(r.stddev, std::sqrt(ss / 3.0), 1e-9);
  EXPECT_NEAR(r.ci99_half_width, z_score(0.99) * r.stddev / 2.0, 1e-9);
}

TEST(Throughput, UsesBudgetAndSeedStream) {
  ScriptedBackend be;
  be.count = [](const SearchBudget&) { return 500; };
  const auto rec = run_throughput(GameId::parse("tictactoe"), Algorithm::uct, be, 40, 5, 77);
  ASSERT_EQ(be.budgets.size(), 5u);
  for (const auto& b : be.budgets) EXPECT_EQ(b, SearchBudget::wall(40));
  SplitMix64 oracle(77);
  for (auto s : be.seeds) EXPECT_EQ(s, oracle.next());
  EXPECT_DOUBLE_EQ(rec.budget_s, 0.04);
  EXPECT_DOUBLE_EQ(rec.normalized_mean, 500 / 0.04);
  EXPECT_EQ(rec.stddev, 0.0);
}

TEST(Throughput, ScalesBudgetWhenFirstTrialIsTooSmall) {
  ScriptedBackend be;
  be.count = [](const SearchBudget& b) { return b.wall_ms() == 100 ? 7 : 70; };
  const auto rec = run_throughput(GameId::parse("tictactoe"), Algorithm::minimax, be, 100, 3, 1);
  // One probe at the original budget, then all trials at ten times it.
  ASSERT_EQ(be.budgets.size(), 4u);
  EXPECT_EQ(be.budgets[0], SearchBudget::wall(100));
  for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(be.budgets[i], SearchBudget::wall(1000));
  EXPECT_EQ(rec.raw_counts, (std::vector<std::uint64_t>{70, 70, 70}));
  EXPECT_DOUBLE_EQ(rec.budget_s, 1.0);
  EXPECT_DOUBLE_EQ(rec.normalized_mean, 70.0);
}

TEST(Throughput, ThresholdIsStrict) {
  ScriptedBackend be;
  be.count = [](const SearchBudget&) { return kAutoBudgetThreshold; };
  run_throughput(GameId::parse("tictactoe"), Algorithm::uct, be, 10, 2, 1);
  EXPECT_EQ(be.budgets.size(), 2u);
}

TEST(Throughput, NativeCountsArePositive) {
  NativeBackend native;
  const auto rec = run_throughput(GameId::parse("nim{3,4,5}"), Algorithm::uct, native, 20, 3, 5);
  EXPECT_EQ(rec.trials, 3u);
  for (auto c : rec.raw_counts) EXPECT_GE(c, kAutoBudgetThreshold);
  EXPECT_GT(rec.normalized_mean, 0.0);
}

TEST(Profile, SyntheticIsExact) {
  const auto p = profile_complexity(GameId::parse("synthetic{branching=4,depth=7}"), 200, 3);
  EXPECT_DOUBLE_EQ(p.d, 7.0);
  EXPECT_DOUBLE_EQ(p.b, 4.0);
  EXPECT_GT(p.t, 0.0);
  EXPECT_EQ(p.n_playouts, 200u);
}

TEST(Profile, TicTacToeAgreesWithExactRandomPlay) {
  const auto exact = exact_random_play(new_trial(GameId::parse("tictactoe")));
  const auto p = profile_complexity(GameId::parse("tictactoe"), 40000, 11);
  // Standard error of the plies mean is about 0.006 at this sample size.
  EXPECT_NEAR(p.d, exact.plies, 0.03);
  // b is a ratio of expectations over visited states.
  EXPECT_NEAR(p.b, exact.moves / exact.visited, 0.03);
  EXPECT_GT(exact.plies, 7.0);
  EXPECT_LT(exact.plies, 9.0);
}

TEST(Profile, NimAgreesWithExactRandomPlay) {
  const auto exact = exact_random_play(new_trial(GameId::parse("nim{2,3}")));
  const auto p = profile_complexity(GameId::parse("nim{2,3}"), 40000, 2);
  EXPECT_NEAR(p.d, exact.plies, 0.03);
  EXPECT_NEAR(p.b, exact.moves / exact.visited, 0.03);
}

TEST(Profile, CostKnobRaisesTimeOnly) {
  const auto cheap = profile_complexity(GameId::parse("synthetic{branching=3,depth=6,cost_knob=1}"), 300, 1);
  const auto dear = profile_complexity(GameId::parse("synthetic{branching=3,depth=6,cost_knob=5000}"), 300, 1);
  EXPECT_EQ(cheap.d, dear.d);
  EXPECT_EQ(cheap.b, dear.b);
  EXPECT_GT(dear.t, 10.0 * cheap.t);
}

TEST(AgentSpec, Parses) {
  const auto a = AgentSpec::parse("uct");
  EXPECT_EQ(a.algorithm, Algorithm::uct);
  EXPECT_DOUBLE_EQ(a.c, kDefaultExploration);
  EXPECT_FALSE(a.iterations);
  const auto b = AgentSpec::parse("minimax:iterations=50");
  EXPECT_EQ(b.algorithm, Algorithm::minimax);
  EXPECT_EQ(b.iterations, 50u);
  const auto c = AgentSpec::parse("uct:c=0.5,iterations=10");
  EXPECT_DOUBLE_EQ(c.c, 0.5);
  EXPECT_THROW(AgentSpec::parse("alphazero"), std::invalid_argument);
  EXPECT_THROW(AgentSpec::parse("uct:temperature=1"), std::invalid_argument);
  EXPECT_THROW(AgentSpec::parse("uct:c"), std::invalid_argument);
}

TEST(Match, ScoringRules) {
  EXPECT_EQ(score_of(1.0), 1.0);
  EXPECT_EQ(score_of(-1.0), 0.0);
  EXPECT_EQ(score_of(0.0), 0.5);
  EXPECT_DOUBLE_EQ(score_average(19, 1, 10), 0.65);
  EXPECT_DOUBLE_EQ(score_average(2, 2, 0), 0.75);
  EXPECT_THROW(score_average(0, 0, 0), std::invalid_argument);
}

TEST(Match, SeatsAlternateAndPairsShareSeeds) {
  // Minimax with an unlimited budget is deterministic and perfect; on
  // nim{1,2} the first mover always wins, so scores alternate 1, 0, 1, 0.
  NativeBackend be;
  const auto perfect = AgentSpec::parse("minimax:iterations=1000000");
  const auto res = run_match(GameId::parse("nim{1,2}"), perfect, be, perfect, be, 6, 10, 3);
  EXPECT_EQ(res.game_scores, (std::vector<double>{1, 0, 1, 0, 1, 0}));
  EXPECT_EQ(res.wins, 3u);
  EXPECT_EQ(res.losses, 3u);
  EXPECT_DOUBLE_EQ(res.score_avg, 0.5);
}

TEST(Match, StrongerAgentScoresHigher) {
  NativeBackend be;
  const auto strong = AgentSpec::parse("minimax:iterations=1000000");
  const auto weak = AgentSpec::parse("uct:iterations=1");
  const auto res = run_match(GameId::parse("tictactoe"), strong, be, weak, be, 10, 10, 1);
  EXPECT_EQ(res.losses, 0u);
  EXPECT_GT(res.score_avg, 0.5);
  EXPECT_EQ(res.wins + res.draws + res.losses, 10u);
}

TEST(Match, SymmetricSelfPlayIsDeterministic) {
  NativeBackend be;
  const auto a = AgentSpec::parse("uct:iterations=200");
  const auto r1 = run_match(GameId::parse("tictactoe"), a, be, a, be, 8, 10, 9);
  const auto r2 = run_match(GameId::parse("tictactoe"), a, be, a, be, 8, 10, 9);
  EXPECT_EQ(r1.game_scores, r2.game_scores);
  // Identical agents replaying the same seed with seats swapped produce
  // mirrored scores within each pair.
  for (std::size_t g = 0; g < 8; g += 2) EXPECT_DOUBLE_EQ(r1.game_scores[g] + r1.game_scores[g + 1], 1.0);
}
