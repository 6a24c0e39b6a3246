#include <string>

#include "json.hpp"

#include "pbos/errors.hpp"
#include "pbos/harness.hpp"
#include "pbos/json_io.hpp"
#include "defaults_json.inc"

namespace pbos {

namespace {

using nlohmann::json;

const json& defaults() {
  static const json kDefaults = json::parse(kDefaultsJson);
  return kDefaults;
}

// Applies a {"learner": {...}, "steps": n, "rules": {...}} layer.
void apply_layer(const json& layer, Rule rule, ExperimentConfig& cfg) {
  if (layer.contains("learner")) merge_learner(layer["learner"], cfg.learner);
  if (layer.contains("steps")) cfg.steps = layer["steps"].get<int>();
  if (layer.contains("rules") && layer["rules"].contains(to_string(rule))) {
    apply_layer(layer["rules"][to_string(rule)], rule, cfg);
  }
}

}  // namespace

std::array<double, 2> default_cpbos_preferences(const std::string& game) {
  const json& prefs = defaults().at("cpbos_preferences");
  if (!prefs.contains(game)) return {1.0, 1.0};
  return prefs[game].get<std::array<double, 2>>();
}

ExperimentConfig default_experiment(const std::string& game, Rule rule) {
  game_by_name(game);  // validates the name
  ExperimentConfig cfg;
  cfg.game = game;
  cfg.rule = rule;
  apply_layer(defaults().at("base"), rule, cfg);
  const json& games = defaults().at("games");
  if (games.contains(game)) apply_layer(games[game], rule, cfg);
  if (rule == Rule::kCpbos) cfg.learner.c_init = default_cpbos_preferences(game);
  cfg.record_every = 1;
  return cfg;
}

ExperimentConfig default_crossplay(const std::string& game, Rule opponent) {
  ExperimentConfig cfg = default_experiment(game, Rule::kPbos);
  ExperimentConfig opp = default_experiment(game, opponent);
  const json& cross = defaults().at("crossplay");
  if (cross.contains(game)) {
    apply_layer(cross[game], Rule::kPbos, cfg);
    apply_layer(cross[game], opponent, opp);
  }
  cfg.opponent = opponent;
  cfg.opponent_learner = opp.learner;
  cfg.steps = std::max(cfg.steps, opp.steps);
  return cfg;
}

BenchmarkOptions default_benchmark() {
  const json& bench = defaults().at("benchmark");
  ExperimentConfig cfg;
  apply_layer(defaults().at("base"), Rule::kPbos, cfg);
  apply_layer(bench, Rule::kPbos, cfg);
  BenchmarkOptions options;
  options.learner = cfg.learner;
  options.steps = cfg.steps;
  if (bench.contains("n_games")) options.n_games = bench["n_games"].get<int>();
  if (bench.contains("seed")) options.seed = bench["seed"].get<std::uint64_t>();
  return options;
}

}  // namespace pbos
