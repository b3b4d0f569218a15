#pragma once

// Sweep plans: a small sectioned text format naming the games x algorithms x
// backends grid, and the driver that runs it into BenchRecords.
//
//   # comment
//   [plan]
//   algorithms = uct, minimax
//   backends = native
//   budget_ms = 100
//   trials = 5
//   seed = 1
//   profile_playouts = 500
//   output = sweep.csv
//
//   [games]
//   tictactoe
//   nim{3,4,5}
//
//   [synthetic-grid]
//   branching = 2,3,4,5
//   depth = 4,6,8,10
//   cost_knob = 10,100,1000
//
// The synthetic grid expands to the cartesian product, appended after the
// explicit games in branching-major order.

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bridgelab/backend.hpp"
#include "bridgelab/bench.hpp"
#include "bridgelab/game.hpp"

namespace bridgelab {

class PlanError : public std::runtime_error {
 public:
  PlanError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "plan line " + std::to_string(line) + ": " + what : "plan: " + what) {}
};

struct ExperimentPlan {
  std::vector<GameId> games;
  std::vector<Algorithm> algorithms{Algorithm::uct, Algorithm::minimax};
  std::vector<BackendKind> backends{BackendKind::native};
  std::int64_t budget_ms = 1000;
  std::uint64_t trials = 30;
  std::uint64_t seed = 1;
  std::uint64_t profile_playouts = 1000;
  std::string output = "sweep.csv";

  std::size_t expected_rows() const { return games.size() * algorithms.size() * backends.size(); }

  void validate() const {
    if (games.empty()) throw PlanError(0, "no games");
    if (algorithms.empty()) throw PlanError(0, "no algorithms");
    if (backends.empty()) throw PlanError(0, "no backends");
    if (budget_ms <= 0) throw PlanError(0, "budget_ms must be positive");
    if (trials == 0) throw PlanError(0, "trials must be positive");
    if (profile_playouts == 0) throw PlanError(0, "profile_playouts must be positive");
  }
};

namespace detail {

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (true) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

inline std::uint64_t plan_uint(const std::string& v, int line, const std::string& key) {
  try {
    std::size_t used = 0;
    if (v.empty() || v[0] == '-') throw std::invalid_argument(v);
    const auto x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw PlanError(line, key + " must be a non-negative integer, got '" + v + "'");
  }
}

}  // namespace detail

inline ExperimentPlan parse_plan(std::istream& in) {
  ExperimentPlan plan;
  std::map<std::string, std::vector<std::int64_t>> grid;
  std::string section;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const auto line = std::string(detail::trim(std::string_view(raw).substr(0, hash)));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw PlanError(lineno, "unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section != "plan" && section != "games" && section != "synthetic-grid") {
        throw PlanError(lineno, "unknown section [" + section + "]");
      }
      continue;
    }
    if (section.empty()) throw PlanError(lineno, "content before the first section");
    if (section == "games") {
      try {
        plan.games.push_back(GameId::parse(line));
      } catch (const std::exception& e) {
        throw PlanError(lineno, e.what());
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw PlanError(lineno, "expected key = value");
    const std::string key(detail::trim(std::string_view(line).substr(0, eq)));
    const std::string value(detail::trim(std::string_view(line).substr(eq + 1)));
    if (section == "synthetic-grid") {
      if (key != "branching" && key != "depth" && key != "cost_knob") {
        throw PlanError(lineno, "unknown synthetic-grid key '" + key + "'");
      }
      auto& axis = grid[key];
      for (const auto& item : detail::split_list(value)) {
        axis.push_back(static_cast<std::int64_t>(detail::plan_uint(item, lineno, key)));
      }
      continue;
    }
    try {
      if (key == "algorithms") {
        plan.algorithms.clear();
        for (const auto& a : detail::split_list(value)) plan.algorithms.push_back(parse_algorithm(a));
      } else if (key == "backends") {
        plan.backends.clear();
        for (const auto& b : detail::split_list(value)) plan.backends.push_back(parse_backend(b));
      } else if (key == "budget_ms") {
        plan.budget_ms = static_cast<std::int64_t>(detail::plan_uint(value, lineno, key));
      } else if (key == "trials") {
        plan.trials = detail::plan_uint(value, lineno, key);
      } else if (key == "seed") {
        plan.seed = detail::plan_uint(value, lineno, key);
      } else if (key == "profile_playouts") {
        plan.profile_playouts = detail::plan_uint(value, lineno, key);
      } else if (key == "output") {
        plan.output = value;
      } else {
        throw PlanError(lineno, "unknown plan key '" + key + "'");
      }
    } catch (const PlanError&) {
      throw;
    } catch (const std::exception& e) {
      throw PlanError(lineno, e.what());
    }
  }

  if (!grid.empty()) {
    auto axis = [&](const char* k, std::int64_t fallback) {
      auto it = grid.find(k);
      return it == grid.end() || it->second.empty() ? std::vector<std::int64_t>{fallback} : it->second;
    };
    for (auto b : axis("branching", 3)) {
      for (auto d : axis("depth", 5)) {
        for (auto k : axis("cost_knob", 1)) {
          try {
            plan.games.emplace_back("synthetic", std::map<std::string, std::int64_t>{
                                                     {"branching", b}, {"depth", d}, {"cost_knob", k}});
          } catch (const std::exception& e) {
            throw PlanError(0, e.what());
          }
        }
      }
    }
  }
  plan.validate();
  return plan;
}

inline ExperimentPlan parse_plan_text(const std::string& text) {
  std::istringstream in(text);
  return parse_plan(in);
}

inline ExperimentPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read plan " + path);
  return parse_plan(in);
}

// Progress hook: (row index, total rows, finished record).
using SweepProgress = std::function<void(std::size_t, std::size_t, const BenchRecord&)>;
using BackendFactory = std::function<std::unique_ptr<Backend>(BackendKind)>;

// Rows come out game-major, then algorithm, then backend. Each backend is
// constructed once for the whole sweep.
inline std::vector<BenchRecord> run_sweep(const ExperimentPlan& plan, const SweepProgress& progress = {},
                                          const BackendFactory& factory = make_backend) {
  plan.validate();
  std::vector<std::unique_ptr<Backend>> backends;
  for (auto k : plan.backends) backends.push_back(factory(k));

  std::vector<BenchRecord> rows;
  rows.reserve(plan.expected_rows());
  for (const auto& game : plan.games) {
    const auto profile = profile_complexity(game, plan.profile_playouts, plan.seed);
    for (auto alg : plan.algorithms) {
      for (auto& backend : backends) {
        auto rec = run_throughput(game, alg, *backend, plan.budget_ms, plan.trials, plan.seed);
        rec.profile = profile;
        rows.push_back(std::move(rec));
        if (progress) progress(rows.size(), plan.expected_rows(), rows.back());
      }
    }
  }
  return rows;
}

}  // namespace bridgelab
