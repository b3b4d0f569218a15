#pragma once

// Messages shared by the host and the guests: the hello handshake and the
// control-channel select_move request.

#include <cstdint>
#include <string>

#include "bridgelab/agents.hpp"
#include "bridgelab/wire.hpp"

namespace bridgelab {

struct SelectMoveRequest {
  std::uint64_t handle = 0;
  Algorithm agent = Algorithm::uct;
  SearchBudget budget = SearchBudget::iterations(1);
  std::uint64_t seed = 0;
  double c = kDefaultExploration;
};

inline json hello_params(const std::string& role, int protocol = kProtocolVersion) {
  return {{"role", role}, {"protocol", protocol}};
}

inline json to_json(const SelectMoveRequest& r) {
  json p = {{"handle", r.handle}, {"agent", std::string(to_string(r.agent))}, {"seed", r.seed}, {"c", r.c}};
  if (r.budget.is_wall()) {
    p["wall_ms"] = r.budget.wall_ms();
  } else {
    p["max_iterations"] = r.budget.max_iterations();
  }
  return p;
}

inline SelectMoveRequest select_move_from_json(const json& p) {
  SelectMoveRequest r;
  r.handle = p.at("handle").get<std::uint64_t>();
  r.agent = p.contains("agent") ? parse_algorithm(p.at("agent").get<std::string>()) : Algorithm::uct;
  const bool wall = p.contains("wall_ms");
  const bool iters = p.contains("max_iterations");
  if (wall == iters) throw std::invalid_argument("select_move needs exactly one of wall_ms, max_iterations");
  r.budget = wall ? SearchBudget::wall(p.at("wall_ms").get<std::int64_t>())
                  : SearchBudget::iterations(p.at("max_iterations").get<std::uint64_t>());
  r.seed = p.value("seed", std::uint64_t{0});
  r.c = p.value("c", kDefaultExploration);
  return r;
}

inline json to_json(const SearchResult& s) {
  return {{"move", s.move_index}, {"playouts", s.playouts}, {"expansions", s.expansions}, {"elapsed", s.elapsed}};
}

inline SearchResult search_result_from_json(const json& j) {
  SearchResult s;
  s.move_index = j.at("move").get<std::size_t>();
  s.playouts = j.value("playouts", std::uint64_t{0});
  s.expansions = j.value("expansions", std::uint64_t{0});
  s.elapsed = j.value("elapsed", 0.0);
  return s;
}

}  // namespace bridgelab
