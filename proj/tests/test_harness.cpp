#include <cmath>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "pbos/errors.hpp"
#include "pbos/harness.hpp"
#include "pbos/json_io.hpp"

using namespace pbos;

TEST_CASE("trajectory CSV round-trips exactly") {
  ExperimentConfig cfg = default_experiment("ipd", Rule::kPbos);
  cfg.steps = 60;
  cfg.record_every = 7;
  cfg.seed = 4;
  const RunResult run = run_selfplay(cfg);
  REQUIRE(run.records.size() == 10);  // steps 0, 7, ..., 56 and the last one
  CHECK(run.records.back().step == 59);
  std::stringstream buffer;
  write_records_csv(buffer, run.records);
  const std::string text = buffer.str();
  CHECK(text.rfind(csv_header(10), 0) == 0);
  const std::vector<RunRecord> back = read_records_csv(buffer);
  CHECK(back == run.records);

  std::stringstream bad("time,L1\n1,2\n");
  CHECK_THROWS_AS(read_records_csv(bad), ConfigError);
}

TEST_CASE("seeded runs are bit-identical and seeds matter") {
  ExperimentConfig cfg = default_experiment("stag_hunt", Rule::kPbos);
  cfg.steps = 300;
  cfg.seed = 21;
  const RunResult a = run_selfplay(cfg);
  const RunResult b = run_selfplay(cfg);
  CHECK(a.records == b.records);
  cfg.seed = 22;
  const RunResult c = run_selfplay(cfg);
  CHECK_FALSE(c.records.front().theta == a.records.front().theta);
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("final losses average the last five percent") {
  RunResult r;
  for (int i = 0; i < 100; ++i) {
    RunRecord rec;
    rec.step = i;
    rec.L1 = i;
    rec.L2 = -i;
    r.records.push_back(rec);
  }
  const auto f = r.final_losses();
  CHECK(f[0] == doctest::Approx(97.0));
  CHECK(f[1] == doctest::Approx(-97.0));
  CHECK(r.last_losses()[0] == 99.0);
  CHECK(r.final_joint_loss() == doctest::Approx(0.0));
}

TEST_CASE("divergence stops and flags the run") {
  ExperimentConfig cfg = default_experiment("tandem", Rule::kPbos);
  cfg.learner.beta0 = 2.0;
  cfg.steps = 500;
  const RunResult run = run_selfplay(cfg);
  CHECK(run.diverged);
  CHECK(run.records.back().diverged);
  CHECK(run.records.size() < 500);
}

TEST_CASE("vector field") {
  LearnerConfig learner;
  const GridSpec grid{-2.0, 2.0, -2.0, 2.0, 5, 5};
  const auto field = emit_vector_field(tandem(), Rule::kNaive, grid, learner);
  REQUIRE(field.size() == 25);
  // (1, 1) is column 3, row 3.
  const FieldSample& s = field[3 * 5 + 3];
  CHECK(s.x == 1.0);
  CHECK(s.y == 1.0);
  CHECK(s.dx == doctest::Approx(-2.0));
  CHECK(s.dy == doctest::Approx(-2.0));

  const auto one = emit_vector_field(tandem(), Rule::kSos, GridSpec{0, 1, 0, 1, 1, 1}, learner);
  CHECK(one.size() == 1);

  // Every point of the x + y = 1 line is a fixed point of SOS.
  for (double x : {-1.0, 0.25, 0.5, 1.5}) {
    const auto on = emit_vector_field(tandem(), Rule::kSos, GridSpec{x, x, 1 - x, 1 - x, 1, 1},
                                      learner);
    CHECK(std::abs(on[0].dx) < 1e-9);
    CHECK(std::abs(on[0].dy) < 1e-9);
  }

  const GameDefinition bilinear = make_game("bilinear", 1, 1, [](auto a, auto b) {
    using S = std::decay_t<decltype(a[0])>;
    return LossPair<S>{a[0] * b[0] * 10.0, a[0] * b[0] * 10.0};
  });
  const auto holes = emit_vector_field(bilinear, Rule::kCgd, GridSpec{0, 0, 0, 0, 1, 1}, learner);
  CHECK_FALSE(holes[0].valid);

  std::stringstream out;
  write_field_csv(out, field);
  std::string header;
  std::getline(out, header);
  CHECK(header.find("dx") != std::string::npos);
  CHECK_THROWS_AS(emit_vector_field(ipd(), Rule::kNaive, grid, learner), ConfigError);
}

TEST_CASE("small benchmark is deterministic and counts every rule") {
  BenchmarkOptions opt;
  opt.n_games = 12;
  opt.steps = 200;
  opt.threads = 3;
  const BenchmarkSummary a = run_benchmark(opt);
  opt.threads = 1;
  const BenchmarkSummary b = run_benchmark(opt);
  CHECK(a.n_games == 12);
  for (Rule r : opt.rules) CHECK(a.mean_joint_loss.at(r) == b.mean_joint_loss.at(r));
  CHECK(a.best_ne == b.best_ne);
  CHECK(a.best_joint_outcome <= a.best_ne + 1e-12);
  const nlohmann::json j = summary_to_json(a);
  CHECK(j.contains("best_ne"));
  CHECK(j["rules"].contains("pbos"));
}

TEST_CASE("experiment JSON") {
  ExperimentConfig cfg;
  merge_experiment(nlohmann::json::parse(R"({"game": "ipd", "rule": "sos", "steps": 10,
      "seed": 3, "learner": {"alpha": 0.5, "c_init": [0.2, 0.3]}})"),
                   cfg);
  CHECK(cfg.game == "ipd");
  CHECK(cfg.rule == Rule::kSos);
  CHECK(cfg.steps == 10);
  CHECK(cfg.learner.alpha == 0.5);
  CHECK(cfg.learner.c_init[1] == 0.3);

  nlohmann::json j = cfg;
  ExperimentConfig back;
  merge_experiment(j, back);
  CHECK(back.game == cfg.game);
  CHECK(back.learner.alpha == cfg.learner.alpha);
  CHECK(back.seed == cfg.seed);

  ExperimentConfig cross = default_crossplay("ipd", Rule::kCgd);
  merge_experiment(nlohmann::json::parse(R"({"learner": {"alpha": 3.0}})"), cross);
  CHECK(cross.learner.alpha == 3.0);
  CHECK(cross.player2().config.alpha == 3.0);
  merge_experiment(nlohmann::json::parse(R"({"opponent_learner": {"alpha": 4.0}})"), cross);
  CHECK(cross.player2().config.alpha == 4.0);
  CHECK(cross.player1().config.alpha == 3.0);

  ExperimentConfig bm;
  merge_experiment(nlohmann::json::parse(
                       R"({"game": {"payoff1": [[1, 2], [3, 4]], "payoff2": [[0, 0], [0, 1]]}})"),
                   bm);
  REQUIRE(bm.bimatrix.has_value());
  CHECK(bm.bimatrix->payoff1[1][0] == 3.0);

  ExperimentConfig e;
  CHECK_THROWS_AS(merge_experiment(nlohmann::json::parse(R"({"colour": 1})"), e), ConfigError);
  CHECK_THROWS_AS(merge_experiment(nlohmann::json::parse(R"({"steps": "many"})"), e), ConfigError);
  CHECK_THROWS_AS(merge_experiment(nlohmann::json::parse("[1, 2]"), e), ConfigError);
  e = ExperimentConfig{};
  e.game = "poker";
  CHECK_THROWS_AS(e.validate(), ConfigError);
}

TEST_CASE("checked-in defaults") {
  const ExperimentConfig ipd_cfg = default_experiment("ipd", Rule::kPbos);
  CHECK(ipd_cfg.learner.alpha == 25.0);
  CHECK(ipd_cfg.steps == 3000);
  const ExperimentConfig cp = default_experiment("ultimatum", Rule::kCpbos);
  CHECK(cp.learner.c_init[0] == 1.0);
  CHECK(cp.learner.c_init[1] == -1.0);
  const auto prefs = default_cpbos_preferences("matching_pennies");
  CHECK(prefs[0] == -1.0);
  const BenchmarkOptions bench = default_benchmark();
  CHECK(bench.n_games == 2000);
  CHECK(bench.steps == 2000);
  CHECK(crossplay_games().size() == 4);
  CHECK(crossplay_baselines().size() == 3);
}
