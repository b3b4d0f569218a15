// bridgelab command-line driver.
//
// Exit status: 0 success, 1 usage error, 2 runtime failure.

#define BRIDGELAB_EMBEDDED_IMPLEMENTATION
#include "bridgelab/embedded.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bridgelab/backend.hpp"
#include "bridgelab/bench.hpp"
#include "bridgelab/heatmap.hpp"
#include "bridgelab/plan.hpp"
#include "bridgelab/regress.hpp"
#include "bridgelab/report.hpp"
#include "selfcheck.hpp"

using namespace bridgelab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

std::string g_invocation;

std::string join_argv(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

std::unique_ptr<Backend> open_backend(BackendKind kind, const std::string& guest_lib) {
  if (kind == BackendKind::embedded && !guest_lib.empty()) load_embedded_guest(guest_lib);
  return make_backend(kind);
}

void print_record(const BenchRecord& r) {
  std::printf("%s %s %s: %.6g per second (99%% CI +/- %.3g, sd %.3g, %llu trials, budget %.3g s)\n",
              r.game.to_string().c_str(), std::string(to_string(r.algorithm)).c_str(),
              std::string(to_string(r.backend)).c_str(), r.normalized_mean, r.ci99_half_width, r.stddev,
              static_cast<unsigned long long>(r.trials), r.budget_s);
}

// ---------------------------------------------------------------------------

int cmd_games_list() {
  for (const auto& s : kGameSchemas) std::printf("%-13s %s\n", std::string(s.name).c_str(), std::string(s.params).c_str());
  return kExitOk;
}

struct ProfileArgs {
  std::string game;
  std::uint64_t playouts = 1000;
  std::uint64_t seed = 1;
};

int cmd_profile(const ProfileArgs& a) {
  const auto p = profile_complexity(GameId::parse(a.game), a.playouts, a.seed);
  std::printf("game=%s playouts=%llu seed=%llu\nd=%.6g\nt=%.6g\nb=%.6g\n", GameId::parse(a.game).to_string().c_str(),
              static_cast<unsigned long long>(a.playouts), static_cast<unsigned long long>(a.seed), p.d, p.t, p.b);
  return kExitOk;
}

struct ServeArgs {
  std::uint16_t port = kDefaultPort;
  std::string games;
  std::int64_t wait_ms = 60'000;
  std::uint64_t iterations = 1000;
};

// Waits for one guest, replays the conformance corpus against it and the
// native agents, then shuts the guest down.
int cmd_serve(const ServeArgs& a) {
  std::vector<std::string> registry;
  std::vector<GameId> corpus;
  for (const auto& id : parse_game_list(a.games)) {
    registry.push_back(id.name());
    corpus.push_back(id);
  }
  if (corpus.empty()) corpus = {GameId::parse("tictactoe"), GameId::parse("nim{3,4,5}")};

  HostServer server(a.port, registry);
  std::printf("listening on 127.0.0.1:%u\n", server.port());
  std::fflush(stdout);
  server.wait_for_guest(std::chrono::milliseconds(a.wait_ms));
  std::printf("guest attached\n");

  NativeBackend native;
  int mismatches = 0;
  for (const auto& game : corpus) {
    const auto root = new_trial(game);
    for (auto alg : {Algorithm::uct, Algorithm::minimax}) {
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto budget = SearchBudget::iterations(a.iterations);
        const auto n = native.select_move(alg, root, budget, seed);
        const auto g = server.select_move(alg, root, budget, seed);
        const bool same = n.same_decision(g);
        mismatches += same ? 0 : 1;
        std::printf("%s %s %s seed=%llu move=%zu/%zu counter=%llu/%llu\n", same ? "same" : "DIFF",
                    game.to_string().c_str(), std::string(to_string(alg)).c_str(),
                    static_cast<unsigned long long>(seed), n.move_index, g.move_index,
                    static_cast<unsigned long long>(n.counter(alg)), static_cast<unsigned long long>(g.counter(alg)));
      }
    }
  }
  for (const auto& [method, count] : server.service().calls()) {
    std::printf("calls %s=%llu\n", method.c_str(), static_cast<unsigned long long>(count));
  }
  server.shutdown_guest();
  std::printf("%d mismatches\n", mismatches);
  return mismatches == 0 ? kExitOk : kExitRuntime;
}

struct GuestArgs {
  std::string host = "127.0.0.1";
  std::uint16_t port = kDefaultPort;
};

int cmd_guest(const GuestArgs& a) {
  std::string diag;
  const int code = reference_guest_main(a.host, a.port, &diag);
  if (!diag.empty()) std::fprintf(stderr, "guest: %s\n", diag.c_str());
  return code;
}

struct BenchArgs {
  std::string game;
  std::string agent = "uct";
  std::string backend = "native";
  std::string guest_lib;
  std::int64_t budget_ms = 1000;
  std::uint64_t trials = 30;
  std::uint64_t seed = 1;
  double c = kDefaultExploration;
  std::string out;
  bool with_profile = false;
};

int cmd_bench(const BenchArgs& a) {
  const auto game = GameId::parse(a.game);
  const auto alg = parse_algorithm(a.agent);
  auto backend = open_backend(parse_backend(a.backend), a.guest_lib);
  auto rec = run_throughput(game, alg, *backend, a.budget_ms, a.trials, a.seed, a.c);
  if (a.with_profile) rec.profile = profile_complexity(game, 1000, a.seed);
  print_record(rec);
  if (!a.out.empty()) write_bench_csv({rec}, a.out, g_invocation);
  return kExitOk;
}

struct MatchArgs {
  std::string game;
  std::string p1 = "uct";
  std::string p2 = "uct";
  std::string backend1 = "native";
  std::string backend2 = "native";
  std::string guest_lib;
  std::uint64_t games = 100;
  std::int64_t budget_ms = 1000;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_match(const MatchArgs& a) {
  const auto game = GameId::parse(a.game);
  const auto s1 = AgentSpec::parse(a.p1);
  const auto s2 = AgentSpec::parse(a.p2);
  auto k1 = parse_backend(a.backend1);
  auto k2 = parse_backend(a.backend2);
  if ((k1 == BackendKind::embedded || k2 == BackendKind::embedded) && !a.guest_lib.empty()) {
    load_embedded_guest(a.guest_lib);
  }
  auto b1 = make_backend(k1);
  // The socket backend owns a listening port, so both seats share one.
  std::unique_ptr<Backend> own2;
  Backend* b2 = b1.get();
  if (k2 != k1) {
    own2 = make_backend(k2);
    b2 = own2.get();
  }
  const auto res = run_match(game, s1, *b1, s2, *b2, a.games, a.budget_ms, a.seed);
  const std::string name1 = a.p1 + "/" + a.backend1;
  const std::string name2 = a.p2 + "/" + a.backend2;
  ScoreRow row{name1, name2, res};
  std::printf("%s vs %s on %s: %llu wins, %llu draws, %llu losses; score %.3f; highest scorer %s\n", name1.c_str(),
              name2.c_str(), game.to_string().c_str(), static_cast<unsigned long long>(res.wins),
              static_cast<unsigned long long>(res.draws), static_cast<unsigned long long>(res.losses), res.score_avg,
              highest_scorer(row).c_str());
  if (!a.out.empty()) write_score_table({row}, a.out, g_invocation);
  return kExitOk;
}

struct SweepArgs {
  std::string plan;
  std::string out;
  std::string guest_lib;
};

int cmd_sweep(const SweepArgs& a) {
  const auto plan = load_plan(a.plan);
  if (!a.guest_lib.empty()) load_embedded_guest(a.guest_lib);
  const std::string out = a.out.empty() ? plan.output : a.out;
  std::fprintf(stderr, "sweep: %zu games, %zu rows -> %s\n", plan.games.size(), plan.expected_rows(), out.c_str());
  const auto rows = run_sweep(plan, [](std::size_t i, std::size_t n, const BenchRecord& r) {
    std::fprintf(stderr, "[%zu/%zu] ", i, n);
    std::fflush(stderr);
    print_record(r);
    std::fflush(stdout);
  });
  write_bench_csv(rows, out, g_invocation + " (seed " + std::to_string(plan.seed) + ")");
  return kExitOk;
}

struct FitArgs {
  std::string data;
  std::string target = "r";
  std::string features = "d,t,b";
  std::string backend = "native";
  std::string test_games;
  std::string out;
  std::string table;
  bool prune = false;
  bool ols = false;
};

int cmd_fit(const FitArgs& a) {
  const auto records = read_bench_csv(a.data);
  const auto kind = parse_target(a.target);
  const auto features = parse_features(a.features);
  auto ds = dataset_from_records(records, kind, parse_backend(a.backend));
  Dataset test{{}, kind};
  if (!a.test_games.empty()) {
    std::tie(ds, test) = split_by_game(ds, parse_game_list(a.test_games));
  }
  if (ds.rows.empty()) throw RegressionError("no training rows for this target and backend in " + a.data);
  auto model = a.ols ? fit_ols(ds, features) : (a.prune ? prune_refit(ds, {}, 0.05, features) : fit_gd(ds, features));
  if (!test.rows.empty()) model.mse_test = mse(model, test);
  std::printf("%s\nMSE %.6g", format_equation(model).c_str(), model.mse_train);
  if (model.mse_test) std::printf(", MSE test %.6g", *model.mse_test);
  std::printf("%s\n", model.degenerate ? " (degenerate: every feature fell below the pruning threshold)" : "");
  if (!a.out.empty()) save_model(model, a.out, g_invocation);
  if (!a.table.empty()) {
    const std::string alg = kind == TargetKind::rollouts ? "MCTS" : "Minimax";
    write_model_table({{alg, a.backend, model}}, a.table, g_invocation);
  }
  return kExitOk;
}

struct PredictArgs {
  std::string model;
  std::optional<double> d, t, b;
};

int cmd_predict(const PredictArgs& a) {
  const auto m = load_model(a.model);
  ComplexityProfile p{1.0, 1.0, 1.0, 0, 0};
  for (auto f : m.features_used) {
    const auto& v = f == Feature::d ? a.d : (f == Feature::t ? a.t : a.b);
    if (!v) throw std::invalid_argument(std::string("model uses ") + feature_letter(f) + "; pass --" + feature_letter(f));
    (f == Feature::d ? p.d : (f == Feature::t ? p.t : p.b)) = *v;
  }
  const auto pred = predict(m, p);
  const char letter = target_letter(m.target_kind);
  std::printf("ln(%c)=%.3f %c≈%.0f\n", letter, pred.ln_target, letter, pred.target);
  return kExitOk;
}

struct HeatmapArgs {
  std::string model;
  std::string data;
  std::string x = "t";
  std::string y = "d";
  std::string out;
  std::string backend = "native";
  int grid = 64;
};

int cmd_heatmap(const HeatmapArgs& a) {
  HeatmapSpec spec;
  spec.model = load_model(a.model);
  spec.x_feature = parse_feature(a.x);
  spec.y_feature = parse_feature(a.y);
  spec.grid_x = spec.grid_y = a.grid;
  spec.description = g_invocation;
  for (const auto& row : dataset_from_records(read_bench_csv(a.data), spec.model.target_kind, parse_backend(a.backend)).rows) {
    spec.points.push_back({row.features, row.target});
  }
  fit_ranges(spec);
  const auto out = render_heatmap(spec, a.out);
  std::printf("wrote %s: %zu cells, %zu points, %zu clipped\n", a.out.c_str(), out.cells, out.points_drawn,
              out.points_clipped);
  return kExitOk;
}

const CLI::IsMember kBackendNames({"native", "embedded", "socket"});

}  // namespace

int main(int argc, char** argv) {
  g_invocation = join_argv(argc, argv);
  CLI::App app{"bridgelab: game-search agents across native, embedded and socket backends"};
  app.require_subcommand(1);

  auto* games = app.add_subcommand("games", "Game catalog");
  games->add_subcommand("list", "List games and their parameters");
  games->require_subcommand(1);

  ProfileArgs profile;
  auto* sp = app.add_subcommand("profile", "Estimate depth, ply time and branching factor by random play");
  sp->add_option("game", profile.game, "Game id, e.g. tictactoe or synthetic{branching=3,depth=6}")->required();
  sp->add_option("--playouts", profile.playouts, "Random games to play");
  sp->add_option("--seed", profile.seed, "Seed");

  ServeArgs serve;
  auto* ss = app.add_subcommand("serve", "Host the engine for one socket guest and run the conformance corpus");
  ss->add_option("--port", serve.port, "Loopback port (0 picks a free port)");
  ss->add_option("--games", serve.games, "Games to allow and test, e.g. tictactoe,nim{3,4,5}");
  ss->add_option("--wait-ms", serve.wait_ms, "How long to wait for the guest");
  ss->add_option("--iterations", serve.iterations, "Iteration budget per corpus search");

  GuestArgs guest;
  auto* sg = app.add_subcommand("guest", "Run the reference guest against a serving host");
  sg->add_option("--host", guest.host);
  sg->add_option("--port", guest.port);

  BenchArgs bench;
  auto* sb = app.add_subcommand("bench", "First-move throughput benchmark");
  sb->add_option("--game", bench.game)->required();
  sb->add_option("--agent", bench.agent, "uct|minimax");
  sb->add_option("--backend", bench.backend, "native|embedded|socket")->check(kBackendNames);
  sb->add_option("--guest-lib", bench.guest_lib, "Shared library exporting bl_guest_init (embedded backend)");
  sb->add_option("--budget-ms", bench.budget_ms);
  sb->add_option("--trials", bench.trials);
  sb->add_option("--seed", bench.seed);
  sb->add_option("--c", bench.c, "UCT exploration constant");
  sb->add_option("--out", bench.out, "CSV output path");
  sb->add_flag("--profile", bench.with_profile, "Attach a complexity profile to the record");

  MatchArgs match;
  auto* sm = app.add_subcommand("match", "Head-to-head games with alternating starts");
  sm->add_option("--game", match.game)->required();
  sm->add_option("--p1", match.p1, "Agent spec, e.g. uct or uct:c=1.0,iterations=1000");
  sm->add_option("--p2", match.p2);
  sm->add_option("--backend1", match.backend1)->check(kBackendNames);
  sm->add_option("--backend2", match.backend2)->check(kBackendNames);
  sm->add_option("--guest-lib", match.guest_lib);
  sm->add_option("--games", match.games);
  sm->add_option("--budget-ms", match.budget_ms);
  sm->add_option("--seed", match.seed);
  sm->add_option("--out", match.out, "Score table path (a CSV twin is written next to it)");

  SweepArgs sweep;
  auto* sw = app.add_subcommand("sweep", "Run a plan's games x algorithms x backends grid into one CSV");
  sw->add_option("--plan", sweep.plan)->required();
  sw->add_option("--out", sweep.out, "Overrides the plan's output path");
  sw->add_option("--guest-lib", sweep.guest_lib);

  FitArgs fit;
  auto* sf = app.add_subcommand("fit", "Fit a log-log model to benchmark data");
  sf->add_option("--data", fit.data)->required();
  sf->add_option("--target", fit.target, "r (playouts) or e (expansions)");
  sf->add_option("--features", fit.features, "Subset of d,t,b");
  sf->add_option("--backend", fit.backend)->check(kBackendNames);
  sf->add_option("--test-games", fit.test_games, "Games held out for MSE test, comma separated");
  sf->add_option("--out", fit.out, "Model file path");
  sf->add_option("--table", fit.table, "Model table path (a CSV twin is written next to it)");
  sf->add_flag("--prune", fit.prune, "Drop weak features and refit");
  sf->add_flag("--ols", fit.ols, "Closed-form least squares instead of gradient descent");

  PredictArgs pred;
  auto* sr = app.add_subcommand("predict", "Evaluate a saved model");
  sr->add_option("--model", pred.model)->required();
  sr->add_option("--d", pred.d);
  sr->add_option("--t", pred.t);
  sr->add_option("--b", pred.b);

  HeatmapArgs heat;
  auto* sh = app.add_subcommand("heatmap", "Render model predictions with data points as SVG");
  sh->add_option("--model", heat.model)->required();
  sh->add_option("--data", heat.data)->required();
  sh->add_option("--x", heat.x);
  sh->add_option("--y", heat.y);
  sh->add_option("--out", heat.out)->required();
  sh->add_option("--backend", heat.backend)->check(kBackendNames);
  sh->add_option("--grid", heat.grid)->check(CLI::Range(1, 1024));

  auto* sc = app.add_subcommand("selfcheck", "Run the built-in oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*games) return cmd_games_list();
    if (*sp) return cmd_profile(profile);
    if (*ss) return cmd_serve(serve);
    if (*sg) return cmd_guest(guest);
    if (*sb) return cmd_bench(bench);
    if (*sm) return cmd_match(match);
    if (*sw) return cmd_sweep(sweep);
    if (*sf) return cmd_fit(fit);
    if (*sr) return cmd_predict(pred);
    if (*sh) return cmd_heatmap(heat);
    if (*sc) return tools::run_selfcheck(std::cout) == 0 ? kExitOk : kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
