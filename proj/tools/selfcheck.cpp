#include "selfcheck.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bridgelab/agents.hpp"
#include "bridgelab/backend.hpp"
#include "bridgelab/game.hpp"
#include "bridgelab/regress.hpp"
#include "bridgelab/wire.hpp"

namespace bridgelab::tools {
namespace {

// Exhaustive negamax without pruning, memoized on the position encoding.
double solve(const GameState& s, std::map<std::string, double>& memo) {
  if (s.is_terminal()) return s.utilities()[s.mover()];
  const auto key = s.encode();
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  double best = -2.0;
  for (std::size_t i = 0; i < s.legal_move_count(); ++i) best = std::max(best, -solve(apply_move(s, i), memo));
  memo.emplace(key, best);
  return best;
}

double pruned(const GameState& s) {
  auto limit = SearchLimit{};
  MinimaxCounters counters;
  return alphabeta_value(s, -1.0, 1.0, limit, counters);
}

bool check_states(const GameId& game) {
  std::map<std::string, double> memo;
  std::map<std::string, bool> seen;
  std::vector<GameState> stack{new_trial(game)};
  while (!stack.empty()) {
    auto s = stack.back();
    stack.pop_back();
    if (!seen.emplace(s.encode(), true).second) continue;
    if (pruned(s) != solve(s, memo)) return false;
    for (std::size_t i = 0; i < s.legal_move_count(); ++i) stack.push_back(apply_move(s, i));
  }
  return true;
}

bool nim_matches_grundy() {
  for (int a = 1; a <= 3; ++a) {
    for (int b = 1; b <= 4; ++b) {
      const auto s = new_trial(GameId("nim", {{"heap0", a}, {"heap1", b}}));
      const double expected = (a ^ b) != 0 ? 1.0 : -1.0;
      if (pruned(s) != expected) return false;
    }
  }
  return true;
}

bool frame_example() {
  const auto m = BridgeMessage::request(1, "is_terminal", json{{"handle", 7}});
  const auto frame = encode_frame(m);
  return frame.size() == 57 && frame.substr(0, 4) == std::string("\x00\x00\x00\x35", 4) &&
         decode_frame(frame) == m;
}

bool uct_takes_win() {
  // X to move with X on 0 and 1, O on 3 and 4: cell 2 wins.
  auto s = new_trial(GameId::parse("tictactoe"));
  for (std::size_t m : {0u, 2u, 0u, 1u}) s.apply(m);  // X0 O3 X1 O4
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    if (uct_select_move(s, SearchBudget::iterations(5000), seed).move_index != 0) return false;
  }
  return true;
}

bool predict_example() {
  RegressionModel m;
  m.features_used = {Feature::d, Feature::t};
  m.coefficients = {-0.946, -0.492};
  m.intercept = 6.291;
  const auto p = predict(m, {100.0, 0.001, 1.0, 0, 0});
  return std::abs(p.ln_target - 5.333) < 5e-4 && std::lround(p.target) == 207;
}

bool socket_matches_native() {
  SocketBackend socket;
  NativeBackend native;
  const auto root = new_trial(GameId::parse("tictactoe"));
  for (auto alg : {Algorithm::uct, Algorithm::minimax}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto a = native.select_move(alg, root, SearchBudget::iterations(200), seed);
      const auto b = socket.select_move(alg, root, SearchBudget::iterations(200), seed);
      if (!a.same_decision(b)) return false;
    }
  }
  return true;
}

}  // namespace

int run_selfcheck(std::ostream& out) {
  const std::vector<std::pair<const char*, std::function<bool()>>> checks = {
      {"alpha-beta equals exhaustive minimax on every tictactoe state", [] { return check_states(GameId::parse("tictactoe")); }},
      {"alpha-beta equals exhaustive minimax on synthetic{3,4}",
       [] { return check_states(GameId::parse("synthetic{branching=3,depth=4}")); }},
      {"nim values follow the xor rule for heaps up to [3,4]", nim_matches_grundy},
      {"tictactoe root value is a draw", [] { return pruned(new_trial(GameId::parse("tictactoe"))) == 0.0; }},
      {"UCT takes a win in one", uct_takes_win},
      {"frame example is 57 bytes with prefix 00 00 00 35", frame_example},
      {"prediction example ln(r)=5.333, r=207", predict_example},
      {"socket reference guest matches native", socket_matches_native},
  };
  int failed = 0;
  for (const auto& [name, fn] : checks) {
    bool ok = false;
    std::string note;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      note = std::string(" (") + e.what() + ")";
    }
    out << (ok ? "ok   " : "FAIL ") << name << note << '\n';
    failed += ok ? 0 : 1;
  }
  return failed;
}

}  // namespace bridgelab::tools
