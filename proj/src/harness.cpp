#include "pbos/harness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "pbos/errors.hpp"

namespace pbos {

void ExperimentConfig::validate() const {
  if (steps < 1) throw ConfigError("steps must be at least 1");
  if (record_every < 1) throw ConfigError("record_every must be at least 1");
  learner.validate();
  if (opponent_learner) opponent_learner->validate();
  if (!bimatrix) game_by_name(game);
}

GameDefinition ExperimentConfig::make_game() const {
  if (bimatrix) return bimatrix_to_game(*bimatrix);
  return game_by_name(game);
}

AgentSpec ExperimentConfig::player1() const { return {rule, learner}; }

AgentSpec ExperimentConfig::player2() const {
  return {opponent.value_or(rule), opponent_learner.value_or(learner)};
}

std::array<double, 2> RunResult::final_losses() const {
  if (records.empty()) return {NAN, NAN};
  const std::size_t n = records.size();
  const std::size_t tail = std::max<std::size_t>(1, n / 20);
  std::array<double, 2> sum{0.0, 0.0};
  for (std::size_t i = n - tail; i < n; ++i) {
    sum[0] += records[i].L1;
    sum[1] += records[i].L2;
  }
  return {sum[0] / static_cast<double>(tail), sum[1] / static_cast<double>(tail)};
}

std::array<double, 2> RunResult::last_losses() const {
  if (records.empty()) return {NAN, NAN};
  return {records.back().L1, records.back().L2};
}

double RunResult::final_joint_loss() const {
  const auto l = final_losses();
  return 0.5 * (l[0] + l[1]);
}

namespace {

RunRecord make_record(const LearnerState& before, const UpdateDiagnostics& diag) {
  RunRecord rec;
  rec.step = before.step;
  rec.L1 = diag.L1;
  rec.L2 = diag.L2;
  rec.L1_mod = diag.L1_mod;
  rec.L2_mod = diag.L2_mod;
  rec.c1 = before.pref.c1;
  rec.c2 = before.pref.c2;
  rec.p = diag.p;
  rec.p1 = diag.p1;
  rec.p2 = diag.p2;
  rec.xi_norm = diag.xi_norm;
  rec.modified_xi_norm = diag.modified_xi_norm;
  rec.theta.assign(before.theta.data(), before.theta.data() + before.theta.size());
  rec.diverged = diag.diverged;
  return rec;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const GameDefinition game = cfg.make_game();
  const AgentSpec p1 = cfg.player1();
  const AgentSpec p2 = cfg.player2();

  RunResult result;
  LearnerState state = init_state(game, p1, p2, cfg.seed);
  for (int t = 0; t < cfg.steps; ++t) {
    const LearnerState before = state;
    UpdateDiagnostics diag;
    try {
      diag = joint_step(state, game, p1, p2);
    } catch (const EvaluationError& e) {
      result.error = e.what();
    } catch (const NumericalError& e) {
      result.error = e.what();
    }
    if (!result.error.empty()) {
      result.diverged = true;
      state = before;
      break;
    }
    // K reported is the estimate used for this step's preference update.
    const bool last = t + 1 == cfg.steps || diag.diverged;
    if (t % cfg.record_every == 0 || last) {
      RunRecord rec = make_record(before, diag);
      rec.K1 = state.pref.K1;
      rec.K2 = state.pref.K2;
      result.records.push_back(std::move(rec));
    }
    if (diag.diverged) {
      result.diverged = true;
      break;
    }
  }
  result.final_state = std::move(state);
  return result;
}

RunResult run_selfplay(const ExperimentConfig& cfg) {
  ExperimentConfig self = cfg;
  self.opponent.reset();
  self.opponent_learner.reset();
  return run_experiment(self);
}

const std::vector<Rule>& crossplay_baselines() {
  static const std::vector<Rule> kRules{Rule::kLola, Rule::kSos, Rule::kCgd};
  return kRules;
}

const std::vector<std::string>& crossplay_games() {
  static const std::vector<std::string> kGames{"tandem", "ipd", "matching_pennies",
                                               "stag_hunt"};
  return kGames;
}

std::map<std::pair<Rule, Rule>, RunResult> run_crossplay_suite(const std::string& game,
                                                               const ExperimentConfig& base) {
  std::map<std::pair<Rule, Rule>, RunResult> out;
  for (Rule opponent : crossplay_baselines()) {
    ExperimentConfig cfg = base;
    cfg.game = game;
    cfg.bimatrix.reset();
    cfg.rule = Rule::kPbos;
    cfg.opponent = opponent;
    out.emplace(std::pair{Rule::kPbos, opponent}, run_experiment(cfg));
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 over a mix of both inputs.
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

BenchmarkSummary run_benchmark(const BenchmarkOptions& options) {
  if (options.n_games < 1) throw ConfigError("benchmark needs at least one game");
  if (options.rules.empty()) throw ConfigError("benchmark needs at least one rule");
  options.learner.validate();

  const int n = options.n_games;
  const std::size_t n_rules = options.rules.size();
  std::vector<BimatrixGame> games(n);
  for (int g = 0; g < n; ++g) games[g] = random_bimatrix(derive_seed(options.seed, 2 * g));

  // joint[g * n_rules + r]; NaN marks a diverged run.
  std::vector<double> joint(static_cast<std::size_t>(n) * n_rules, NAN);
  auto work = [&](int first, int stride) {
    for (int g = first; g < n; g += stride) {
      for (std::size_t r = 0; r < n_rules; ++r) {
        ExperimentConfig cfg;
        cfg.bimatrix = games[g];
        cfg.rule = options.rules[r];
        cfg.learner = options.learner;
        cfg.steps = options.steps;
        cfg.seed = derive_seed(options.seed, 2 * g + 1);
        cfg.record_every = std::max(1, options.steps / 100);
        const RunResult run = run_selfplay(cfg);
        if (!run.diverged) joint[g * n_rules + r] = run.final_joint_loss();
      }
    }
  };
  int threads = options.threads > 0 ? options.threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, n);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  BenchmarkSummary summary;
  summary.n_games = n;
  summary.rules = options.rules;
  for (std::size_t r = 0; r < n_rules; ++r) {
    double sum = 0.0;
    int count = 0;
    for (int g = 0; g < n; ++g) {
      const double v = joint[g * n_rules + r];
      if (std::isnan(v)) continue;
      sum += v;
      ++count;
    }
    summary.mean_joint_loss[options.rules[r]] = count > 0 ? sum / count : NAN;
    summary.diverged[options.rules[r]] = n - count;
  }
  summary.best_ne = best_ne_metric(games, BestNeReading::kMinJointLoss);
  summary.best_ne_separate_minima = best_ne_metric(games, BestNeReading::kSeparateMinima);
  double best_cells = 0.0;
  for (const BimatrixGame& bm : games) {
    double best = INFINITY;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        best = std::min(best, -0.5 * (bm.payoff1[i][j] + bm.payoff2[i][j]));
      }
    }
    best_cells += best;
  }
  summary.best_joint_outcome = best_cells / n;

  const auto pbos = summary.mean_joint_loss.find(Rule::kPbos);
  for (Rule rule : options.rules) {
    if (rule == Rule::kPbos) continue;
    if (!summary.best_baseline ||
        summary.mean_joint_loss[rule] < summary.mean_joint_loss[*summary.best_baseline]) {
      summary.best_baseline = rule;
    }
  }
  if (pbos != summary.mean_joint_loss.end() && summary.best_baseline) {
    const double gap_pbos = pbos->second - summary.best_ne;
    const double gap_base = summary.mean_joint_loss[*summary.best_baseline] - summary.best_ne;
    summary.proximity_improvement = 100.0 * (1.0 - gap_pbos / gap_base);
  }
  return summary;
}

std::vector<FieldSample> emit_vector_field(const GameDefinition& game, Rule rule,
                                           const GridSpec& grid, const LearnerConfig& learner) {
  if (game.d1() != 1 || game.d2() != 1) {
    throw ConfigError("vector fields need a game with one parameter per player");
  }
  if (grid.nx < 1 || grid.ny < 1) throw ConfigError("grid needs at least one point per axis");
  learner.validate();
  const AgentSpec agent{rule, learner};
  auto axis = [](double lo, double hi, int count, int k) {
    return count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * k / (count - 1);
  };
  std::vector<FieldSample> field;
  field.reserve(static_cast<std::size_t>(grid.nx) * grid.ny);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      FieldSample sample;
      sample.x = axis(grid.x_min, grid.x_max, grid.nx, i);
      sample.y = axis(grid.y_min, grid.y_max, grid.ny, j);
      LearnerState state;
      state.theta = Vec(2);
      state.theta << sample.x, sample.y;
      if (uses_preferences(rule)) {
        state.pref.c1 = learner.c_init[0];
        state.pref.c2 = learner.c_init[1];
      }
      try {
        const UpdateDiagnostics diag = joint_step(state, game, agent, agent);
        sample.dx = diag.dtheta1(0) / learner.alpha;
        sample.dy = diag.dtheta2(0) / learner.alpha;
      } catch (const NumericalError&) {
        sample.valid = false;
      } catch (const EvaluationError&) {
        sample.valid = false;
      }
      field.push_back(sample);
    }
  }
  return field;
}

std::string csv_header(int dim) {
  std::string header =
      "step,L1,L2,L1_mod,L2_mod,c1,c2,K1,K2,p,p1,p2,xi_norm,modified_xi_norm,diverged";
  for (int i = 0; i < dim; ++i) header += ",theta" + std::to_string(i);
  return header;
}

void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  const int dim = records.empty() ? 0 : static_cast<int>(records.front().theta.size());
  out << csv_header(dim) << '\n';
  std::ostringstream row;
  row << std::setprecision(17);
  for (const RunRecord& r : records) {
    row.str("");
    row << r.step << ',' << r.L1 << ',' << r.L2 << ',' << r.L1_mod << ',' << r.L2_mod << ','
        << r.c1 << ',' << r.c2 << ',' << r.K1 << ',' << r.K2 << ',' << r.p << ',' << r.p1 << ','
        << r.p2 << ',' << r.xi_norm << ',' << r.modified_xi_norm << ',' << (r.diverged ? 1 : 0);
    for (double v : r.theta) row << ',' << v;
    out << row.str() << '\n';
  }
}

std::vector<RunRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty trajectory CSV");
  const int columns = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
  constexpr int kFixed = 15;
  if (columns < kFixed || line.rfind("step,", 0) != 0) {
    throw ConfigError("unrecognized trajectory CSV header");
  }
  std::vector<RunRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != columns) {
      throw ConfigError("trajectory CSV row has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(columns));
    }
    auto real = [&](int k) { return std::stod(cells[k]); };
    RunRecord r;
    r.step = std::stoll(cells[0]);
    r.L1 = real(1);
    r.L2 = real(2);
    r.L1_mod = real(3);
    r.L2_mod = real(4);
    r.c1 = real(5);
    r.c2 = real(6);
    r.K1 = real(7);
    r.K2 = real(8);
    r.p = real(9);
    r.p1 = real(10);
    r.p2 = real(11);
    r.xi_norm = real(12);
    r.modified_xi_norm = real(13);
    r.diverged = cells[14] == "1";
    for (int k = kFixed; k < columns; ++k) r.theta.push_back(real(k));
    records.push_back(std::move(r));
  }
  return records;
}

void write_field_csv(std::ostream& out, const std::vector<FieldSample>& field) {
  out << "x,y,dx,dy,norm,ux,uy,valid\n";
  std::ostringstream row;
  row << std::setprecision(17);
  for (const FieldSample& s : field) {
    const double norm = std::hypot(s.dx, s.dy);
    const double ux = norm > 0.0 ? s.dx / norm : 0.0;
    const double uy = norm > 0.0 ? s.dy / norm : 0.0;
    row.str("");
    row << s.x << ',' << s.y << ',' << s.dx << ',' << s.dy << ',' << norm << ',' << ux << ','
        << uy << ',' << (s.valid ? 1 : 0);
    out << row.str() << '\n';
  }
}

}  // namespace pbos
