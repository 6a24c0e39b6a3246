#pragma once

// Seeded experiment execution: self-play, cross-play, the random bimatrix
// benchmark and one-step vector fields.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pbos/derivkit.hpp"
#include "pbos/games.hpp"
#include "pbos/learners.hpp"
#include "pbos/nash.hpp"

namespace pbos {

struct ExperimentConfig {
  std::string game = "tandem";
  // When set, overrides `game` with a 2x2 payoff table.
  std::optional<BimatrixGame> bimatrix;
  Rule rule = Rule::kPbos;
  // Player 2's rule in cross-play; self-play when unset.
  std::optional<Rule> opponent;
  LearnerConfig learner;
  // Player 2's hyperparameters in cross-play; defaults to `learner`.
  std::optional<LearnerConfig> opponent_learner;
  int steps = 2000;
  std::uint64_t seed = 0;
  int record_every = 1;

  void validate() const;
  GameDefinition make_game() const;
  AgentSpec player1() const;
  AgentSpec player2() const;
};

struct RunRecord {
  std::int64_t step = 0;
  double L1 = 0.0;
  double L2 = 0.0;
  double L1_mod = 0.0;
  double L2_mod = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double K1 = 1.0;
  double K2 = 1.0;
  double p = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double xi_norm = 0.0;
  double modified_xi_norm = 0.0;
  std::vector<double> theta;
  bool diverged = false;

  bool operator==(const RunRecord&) const = default;
};

struct RunResult {
  std::vector<RunRecord> records;
  bool diverged = false;
  std::string error;  // set when the run stopped on an evaluation or solve error
  LearnerState final_state;

  // Mean losses over the last 5% of recorded rows (at least one row).
  std::array<double, 2> final_losses() const;
  // Losses of the last recorded row.
  std::array<double, 2> last_losses() const;
  double final_joint_loss() const;  // (L1 + L2) / 2 of final_losses()
};

// Steps the configured rule(s) from a seeded initial point. Records every
// `record_every` steps plus the last one. Divergence (|theta| > 1e6,
// |c| > 1e3, non-finite values) and step errors stop the run and flag it;
// the partial trajectory is kept.
RunResult run_experiment(const ExperimentConfig& cfg);
RunResult run_selfplay(const ExperimentConfig& cfg);  // ignores cfg.opponent

// Baselines faced by PBOS in cross-play, and the games it is played on.
const std::vector<Rule>& crossplay_baselines();
const std::vector<std::string>& crossplay_games();

// PBOS as player 1 against each baseline as player 2, same seed for all.
std::map<std::pair<Rule, Rule>, RunResult> run_crossplay_suite(const std::string& game,
                                                               const ExperimentConfig& base);

struct BenchmarkSummary {
  int n_games = 0;
  std::vector<Rule> rules;
  std::map<Rule, double> mean_joint_loss;  // mean over non-diverged games
  std::map<Rule, int> diverged;
  double best_ne = 0.0;                  // min-joint-loss reading
  double best_ne_separate_minima = 0.0;  // alternative reading
  // Lowest average joint loss over the four cells, equilibrium or not.
  double best_joint_outcome = 0.0;
  // 100 * (1 - gap(PBOS) / gap(best baseline)); gaps measured to best_ne.
  double proximity_improvement = 0.0;
  std::optional<Rule> best_baseline;
};

struct BenchmarkOptions {
  int n_games = 2000;
  std::uint64_t seed = 1;
  std::vector<Rule> rules{Rule::kPbos, Rule::kSos, Rule::kLola, Rule::kCgd};
  LearnerConfig learner;
  int steps = 2000;
  int threads = 0;  // 0 = hardware concurrency
};

BenchmarkSummary run_benchmark(const BenchmarkOptions& options);

// Per-run generator seed derived from a master seed and a run index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

struct GridSpec {
  double x_min = -2.0;
  double x_max = 2.0;
  double y_min = -2.0;
  double y_max = 2.0;
  int nx = 21;
  int ny = 21;
};

struct FieldSample {
  double x = 0.0;
  double y = 0.0;
  double dx = 0.0;  // update direction: -(rule direction)
  double dy = 0.0;
  bool valid = true;  // false where the rule failed (a hole)
};

// One-step update direction of `rule` (self-play, preferences from
// learner.c_init) over a uniform grid. Requires d1 = d2 = 1.
std::vector<FieldSample> emit_vector_field(const GameDefinition& game, Rule rule,
                                           const GridSpec& grid, const LearnerConfig& learner);

// Checked-in per-game defaults (configs/defaults.json, compiled in).
ExperimentConfig default_experiment(const std::string& game, Rule rule);
// Player 1 = PBOS, player 2 = opponent, cross-play defaults for the game.
ExperimentConfig default_crossplay(const std::string& game, Rule opponent);
BenchmarkOptions default_benchmark();
// Fixed preferences used for CPBOS on each named game.
std::array<double, 2> default_cpbos_preferences(const std::string& game);

// CSV trajectory I/O. Reals are written with 17 significant digits so that
// reading back reproduces every field exactly.
std::string csv_header(int dim);
void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records_csv(std::istream& in);

void write_field_csv(std::ostream& out, const std::vector<FieldSample>& field);

}  // namespace pbos
