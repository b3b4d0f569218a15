#pragma once

// Measurement harness: game complexity profiling, first-move throughput with
// normalization and confidence intervals, and head-to-head matches.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bridgelab/agents.hpp"
#include "bridgelab/backend.hpp"
#include "bridgelab/game.hpp"
#include "bridgelab/rng.hpp"

namespace bridgelab {

struct ComplexityProfile {
  double d = 0.0;  // mean plies per random game
  double t = 0.0;  // seconds per ply (apply + move generation), native
  double b = 0.0;  // mean legal-move count over visited non-terminal states
  std::uint64_t n_playouts = 0;
  std::uint64_t seed = 0;
};

struct ConfidenceInterval {
  double mean = 0.0;
  double half_width = 0.0;
};

inline double z_score(double level) {
  if (level == 0.95) return 1.96;
  if (level == 0.99) return 2.576;
  throw std::invalid_argument("confidence level must be 0.95 or 0.99");
}

// Sample (n - 1) standard deviation; zero for fewer than two samples.
inline double sample_stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

// Normal approximation: half_width = z * s / sqrt(n).
inline ConfidenceInterval confidence_interval(const std::vector<double>& samples, double level = 0.99) {
  if (samples.empty()) throw std::invalid_argument("confidence_interval needs at least one sample");
  const double z = z_score(level);
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  return {mean, z * sample_stddev(samples) / std::sqrt(n)};
}

inline ComplexityProfile profile_complexity(const GameId& game, std::uint64_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("profile_complexity needs at least one playout");
  SplitMix64 seeds(seed);
  const GameState initial = new_trial(game);
  std::uint64_t plies = 0;
  std::uint64_t visited = 0;
  std::uint64_t moves = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t i = 0; i < n; ++i) {
    GameState s = initial;
    SplitMix64 rng(seeds.next());
    for (std::size_t k = s.legal_move_count(); k != 0; k = s.legal_move_count()) {
      ++visited;
      moves += k;
      s.apply(static_cast<std::size_t>(rng.below(k)));
      ++plies;
    }
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ComplexityProfile p;
  p.n_playouts = n;
  p.seed = seed;
  p.d = static_cast<double>(plies) / static_cast<double>(n);
  p.b = visited ? static_cast<double>(moves) / static_cast<double>(visited) : 1.0;
  // Floor guards against a clock too coarse for a very short run.
  p.t = std::max(elapsed, 1e-9) / static_cast<double>(std::max<std::uint64_t>(plies, 1));
  return p;
}

struct BenchRecord {
  GameId game;
  Algorithm algorithm = Algorithm::uct;
  BackendKind backend = BackendKind::native;
  double budget_s = 0.0;
  std::uint64_t trials = 0;
  std::vector<std::uint64_t> raw_counts;
  double normalized_mean = 0.0;  // counts per second
  double stddev = 0.0;           // of the normalized per-trial counts
  double ci99_half_width = 0.0;
  std::optional<ComplexityProfile> profile;  // filled by sweeps, feeds regression

  friend bool operator==(const BenchRecord& a, const BenchRecord& b) {
    auto same_profile = [](const std::optional<ComplexityProfile>& x, const std::optional<ComplexityProfile>& y) {
      if (x.has_value() != y.has_value()) return false;
      return !x || (x->d == y->d && x->t == y->t && x->b == y->b);
    };
    return a.game == b.game && a.algorithm == b.algorithm && a.backend == b.backend && a.budget_s == b.budget_s &&
           a.trials == b.trials && a.raw_counts == b.raw_counts && a.normalized_mean == b.normalized_mean &&
           a.stddev == b.stddev && a.ci99_half_width == b.ci99_half_width && same_profile(a.profile, b.profile);
  }
};

// Fills the derived statistics from raw counts and budget.
inline void summarize(BenchRecord& r) {
  std::vector<double> per_second;
  per_second.reserve(r.raw_counts.size());
  for (auto c : r.raw_counts) per_second.push_back(static_cast<double>(c) / r.budget_s);
  r.trials = r.raw_counts.size();
  const double n = static_cast<double>(r.trials);
  const double raw_mean = std::accumulate(r.raw_counts.begin(), r.raw_counts.end(), 0.0) / n;
  r.normalized_mean = raw_mean / r.budget_s;
  r.stddev = sample_stddev(per_second);
  r.ci99_half_width = z_score(0.99) * r.stddev / std::sqrt(n);
}

inline constexpr std::uint64_t kAutoBudgetThreshold = 20;

// Each trial is one first-move select_move under a wall budget. If the first
// trial counts fewer than 20 units, the budget is multiplied by ten for all
// trials and the normalization divides by the larger budget.
inline BenchRecord run_throughput(const GameId& game, Algorithm algorithm, Backend& backend, std::int64_t budget_ms,
                                  std::uint64_t trials, std::uint64_t seed, double c = kDefaultExploration) {
  if (trials == 0) throw std::invalid_argument("run_throughput needs at least one trial");
  const GameState root = new_trial(game);
  auto measure = [&](std::int64_t ms) {
    SplitMix64 seeds(seed);
    std::vector<std::uint64_t> counts;
    for (std::uint64_t i = 0; i < trials; ++i) {
      auto r = backend.select_move(algorithm, root, SearchBudget::wall(ms), seeds.next(), c);
      counts.push_back(r.counter(algorithm));
      if (i == 0 && counts[0] < kAutoBudgetThreshold && ms == budget_ms) return std::vector<std::uint64_t>{};
    }
    return counts;
  };

  BenchRecord rec;
  rec.game = game;
  rec.algorithm = algorithm;
  rec.backend = backend.kind();
  std::int64_t ms = budget_ms;
  rec.raw_counts = measure(ms);
  if (rec.raw_counts.empty()) {
    ms = budget_ms * 10;
    rec.raw_counts = measure(ms);
  }
  rec.budget_s = static_cast<double>(ms) / 1000.0;
  summarize(rec);
  return rec;
}

// ---------------------------------------------------------------------------
// Matches

struct AgentSpec {
  Algorithm algorithm = Algorithm::uct;
  double c = kDefaultExploration;
  std::optional<std::uint64_t> iterations;  // overrides the wall budget

  // uct | minimax, optionally followed by :key=value,... with keys c, iterations.
  static AgentSpec parse(std::string_view text) {
    AgentSpec spec;
    const auto colon = text.find(':');
    spec.algorithm = parse_algorithm(text.substr(0, colon));
    if (colon == std::string_view::npos) return spec;
    auto rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) throw std::invalid_argument("agent option needs key=value: " + std::string(item));
      const std::string key(item.substr(0, eq));
      const std::string value(item.substr(eq + 1));
      if (key == "c") {
        spec.c = std::stod(value);
      } else if (key == "iterations") {
        spec.iterations = std::stoull(value);
      } else {
        throw std::invalid_argument("unknown agent option '" + key + "'");
      }
    }
    return spec;
  }
};

struct ScoreResult {
  std::uint64_t games_played = 0;
  std::uint64_t wins = 0;  // for player 1 (the first agent)
  std::uint64_t draws = 0;
  std::uint64_t losses = 0;
  double score_avg = 0.0;
  std::vector<double> game_scores;  // player 1's score per game
};

inline double score_of(double utility) { return utility > 0 ? 1.0 : (utility < 0 ? 0.0 : 0.5); }

// Plays one game. `first` is the agent index (0 or 1) that moves first.
// Move seeds come from a stream seeded per game, indexed by ply only, so
// swapping seats with the same seed replays the same sequence of searches.
inline double play_game(const GameId& game, const AgentSpec* agents[2], Backend* backends[2], int first,
                        std::int64_t budget_ms, std::uint64_t game_seed) {
  GameState s = new_trial(game);
  SplitMix64 move_seeds(game_seed);
  while (!s.is_terminal()) {
    const int agent = s.mover() == 0 ? first : 1 - first;
    const auto& spec = *agents[agent];
    const auto budget = spec.iterations ? SearchBudget::iterations(*spec.iterations) : SearchBudget::wall(budget_ms);
    const auto r = backends[agent]->select_move(spec.algorithm, s, budget, move_seeds.next(), spec.c);
    s.apply(r.move_index);
  }
  const int seat_of_agent1 = first == 0 ? 0 : 1;
  return score_of(s.utilities()[seat_of_agent1]);
}

// Starting player alternates every game; games 2i and 2i+1 share a seed.
inline ScoreResult run_match(const GameId& game, const AgentSpec& a1, Backend& b1, const AgentSpec& a2, Backend& b2,
                             std::uint64_t n_games, std::int64_t budget_ms, std::uint64_t seed) {
  if (n_games == 0) throw std::invalid_argument("run_match needs at least one game");
  const AgentSpec* agents[2] = {&a1, &a2};
  Backend* backends[2] = {&b1, &b2};
  SplitMix64 pair_seeds(seed);
  ScoreResult res;
  std::uint64_t pair_seed = 0;
  for (std::uint64_t g = 0; g < n_games; ++g) {
    if (g % 2 == 0) pair_seed = pair_seeds.next();
    const double score = play_game(game, agents, backends, static_cast<int>(g % 2), budget_ms, pair_seed);
    res.game_scores.push_back(score);
    if (score == 1.0) {
      ++res.wins;
    } else if (score == 0.0) {
      ++res.losses;
    } else {
      ++res.draws;
    }
  }
  res.games_played = n_games;
  res.score_avg = (static_cast<double>(res.wins) + 0.5 * static_cast<double>(res.draws)) / static_cast<double>(n_games);
  return res;
}

inline double score_average(std::uint64_t wins, std::uint64_t draws, std::uint64_t losses) {
  const auto n = wins + draws + losses;
  if (n == 0) throw std::invalid_argument("no games");
  return (static_cast<double>(wins) + 0.5 * static_cast<double>(draws)) / static_cast<double>(n);
}

}  // namespace bridgelab
