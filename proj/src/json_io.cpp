#include "pbos/json_io.hpp"

#include <cmath>

#include "pbos/errors.hpp"

namespace pbos {

using nlohmann::json;

void to_json(json& j, const BimatrixGame& bm) {
  j = json{{"payoff1", bm.payoff1}, {"payoff2", bm.payoff2}};
}

void from_json(const json& j, BimatrixGame& bm) {
  try {
    bm.payoff1 = j.at("payoff1").get<std::array<std::array<double, 2>, 2>>();
    bm.payoff2 = j.at("payoff2").get<std::array<std::array<double, 2>, 2>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed bimatrix game: ") + e.what());
  }
}

void to_json(json& j, const LearnerConfig& cfg) {
  j = json{{"alpha", cfg.alpha},
           {"beta0", cfg.beta0},
           {"beta_decay", cfg.beta_decay},
           {"a", cfg.a},
           {"b", cfg.b},
           {"gamma_pref", cfg.gamma_pref},
           {"c_init", cfg.c_init},
           {"theta_init_mean", cfg.theta_init_mean},
           {"theta_init_std", cfg.theta_init_std},
           {"max_steps", cfg.max_steps}};
}

void merge_learner(const json& j, LearnerConfig& cfg) {
  if (!j.is_object()) throw ConfigError("learner config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "alpha") cfg.alpha = value.get<double>();
      else if (key == "beta0") cfg.beta0 = value.get<double>();
      else if (key == "beta_decay") cfg.beta_decay = value.get<double>();
      else if (key == "a") cfg.a = value.get<double>();
      else if (key == "b") cfg.b = value.get<double>();
      else if (key == "gamma_pref") cfg.gamma_pref = value.get<double>();
      else if (key == "c_init") cfg.c_init = value.get<std::array<double, 2>>();
      else if (key == "theta_init_mean") cfg.theta_init_mean = value.get<double>();
      else if (key == "theta_init_std") cfg.theta_init_std = value.get<double>();
      else if (key == "max_steps") cfg.max_steps = value.get<int>();
      else throw ConfigError("unknown learner field '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed learner config: ") + e.what());
  }
}

void to_json(json& j, const ExperimentConfig& cfg) {
  j = json::object();
  if (cfg.bimatrix) {
    j["game"] = *cfg.bimatrix;
  } else {
    j["game"] = cfg.game;
  }
  j["rule"] = to_string(cfg.rule);
  if (cfg.opponent) j["opponent"] = to_string(*cfg.opponent);
  j["learner"] = cfg.learner;
  if (cfg.opponent_learner) j["opponent_learner"] = *cfg.opponent_learner;
  j["steps"] = cfg.steps;
  j["seed"] = cfg.seed;
  j["record_every"] = cfg.record_every;
}

void merge_experiment(const json& j, ExperimentConfig& cfg) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "game") {
        if (value.is_string()) {
          cfg.game = value.get<std::string>();
          cfg.bimatrix.reset();
        } else {
          cfg.bimatrix = value.get<BimatrixGame>();
        }
      } else if (key == "rule") {
        cfg.rule = rule_from_string(value.get<std::string>());
      } else if (key == "opponent") {
        if (value.is_null()) cfg.opponent.reset();
        else cfg.opponent = rule_from_string(value.get<std::string>());
      } else if (key == "learner") {
        // Shared fields reach both players; "opponent_learner" (applied
        // after, keys are sorted) refines player 2.
        merge_learner(value, cfg.learner);
        if (cfg.opponent_learner) merge_learner(value, *cfg.opponent_learner);
      } else if (key == "opponent_learner") {
        LearnerConfig opp = cfg.opponent_learner.value_or(cfg.learner);
        merge_learner(value, opp);
        cfg.opponent_learner = opp;
      } else if (key == "steps") {
        cfg.steps = value.get<int>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "record_every") {
        cfg.record_every = value.get<int>();
      } else {
        throw ConfigError("unknown experiment field '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed experiment config: ") + e.what());
  }
}

json summary_to_json(const BenchmarkSummary& s) {
  json j;
  j["n_games"] = s.n_games;
  json rules = json::object();
  for (Rule rule : s.rules) {
    const double mean = s.mean_joint_loss.at(rule);
    rules[to_string(rule)] = {{"mean_joint_loss", std::isnan(mean) ? json() : json(mean)},
                              {"diverged", s.diverged.at(rule)}};
  }
  j["rules"] = rules;
  j["best_ne"] = s.best_ne;
  j["best_ne_separate_minima"] = s.best_ne_separate_minima;
  j["best_joint_outcome"] = s.best_joint_outcome;
  j["best_baseline"] = s.best_baseline ? json(to_string(*s.best_baseline)) : json();
  j["proximity_improvement_percent"] = s.proximity_improvement;
  return j;
}

}  // namespace pbos
