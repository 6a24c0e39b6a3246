#pragma once

// JSON forms of games, configs and benchmark summaries.
//
//   BimatrixGame:     {"payoff1": [[a, b], [c, d]], "payoff2": [[..], [..]]}
//   ExperimentConfig: {"game": "tandem" | <BimatrixGame>, "rule": "pbos",
//                      "opponent": "sos", "learner": {...},
//                      "opponent_learner": {...}, "steps": 2000, "seed": 7,
//                      "record_every": 1}
// Missing fields keep their defaults.

#include "json.hpp"

#include "pbos/harness.hpp"

namespace pbos {

void to_json(nlohmann::json& j, const BimatrixGame& bm);
void from_json(const nlohmann::json& j, BimatrixGame& bm);

void to_json(nlohmann::json& j, const LearnerConfig& cfg);
// Overlays the fields present in j onto cfg.
void merge_learner(const nlohmann::json& j, LearnerConfig& cfg);

void to_json(nlohmann::json& j, const ExperimentConfig& cfg);
// Overlays the fields present in j onto cfg; throws ConfigError on malformed
// input.
void merge_experiment(const nlohmann::json& j, ExperimentConfig& cfg);

nlohmann::json summary_to_json(const BenchmarkSummary& summary);

}  // namespace pbos
