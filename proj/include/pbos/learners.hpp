#pragma once

// Update rules for two-player differentiable games: naive simultaneous
// gradient descent, LOLA, SOS, CGD, and the preference-based shapers CPBOS
// (fixed preferences) and PBOS (learned preferences).
//
// Preference-based players optimize L1' = L1 + c1 L2 and L2' = L2 + c2 L1.
// Every rule is written against a DerivativeBundle, so the same code serves
// raw and preference-modified losses.

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "pbos/derivkit.hpp"
#include "pbos/game.hpp"

namespace pbos {

enum class Rule { kNaive, kLola, kSos, kCgd, kCpbos, kPbos };

std::string to_string(Rule rule);
Rule rule_from_string(const std::string& name);

// True for rules that treat their c as a preference (CPBOS, PBOS).
bool uses_preferences(Rule rule);

struct LearnerConfig {
  double alpha = 0.1;        // parameter learning rate
  double beta0 = 0.05;       // initial preference learning rate
  double beta_decay = 0.999; // beta_t = beta0 * beta_decay^t
  double a = 0.5;            // SOS alignment threshold, (0, 1)
  double b = 0.1;            // SOS gradient-norm threshold, (0, 1)
  double gamma_pref = 0.9;   // discount of the preference-response regression
  std::array<double, 2> c_init{0.0, 0.0};
  double theta_init_mean = 0.0;
  double theta_init_std = 1.0;
  int max_steps = 2000;

  // Throws ConfigError when a hyperparameter is out of range.
  void validate() const;
};

// L1' = L1 + c1 L2 and L2' = L2 + c2 L1, every block transformed linearly.
DerivativeBundle modified_losses(const DerivativeBundle& bundle, double c1, double c2);

// xi = (grad_1 L1, grad_2 L2).
Vec simultaneous_gradient(const DerivativeBundle& bundle);

struct SosTerms {
  Vec xi;          // simultaneous gradient
  Vec lookahead;   // xi0 = (I - alpha H_o) xi
  Vec shaping;     // chi = (h12(L2) grad_2 L1, h21(L1) grad_1 L2)
  Vec direction;   // xi_p = xi0 - p alpha chi
  double p = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
};

// Stable opponent shaping direction with the two-part criterion for p.
// forced_p overrides the criterion (p = 1 gives LOLA, p = 0 LookAhead).
SosTerms sos_direction(const DerivativeBundle& bundle, double alpha, double a, double b,
                       std::optional<double> forced_p = std::nullopt);

Vec lola_direction(const DerivativeBundle& bundle, double alpha);

// Solves [[I, alpha h12(L1)], [alpha h21(L2), I]] v = xi. The step is
// theta <- theta - alpha v. Throws NumericalError on a singular system.
Vec cgd_direction(const DerivativeBundle& bundle, double alpha);

// Discounted least-squares estimate of how each player's preference moves
// with the other's, plus the history needed to compute it.
struct PreferenceState {
  double c1 = 0.0;
  double c2 = 0.0;
  // Last two recorded (c1, c2) pairs, most recent last.
  std::array<std::array<double, 2>, 2> history{};
  int recorded = 0;
  double S1 = 0.0;
  double S2 = 0.0;
  double r = 0.0;
  double K1 = 1.0;
  double K2 = 1.0;
  std::array<double, 2> beta{0.0, 0.0};
  std::int64_t t = 0;

  void record();
};

inline constexpr double kPreferenceGuard = 0.01;

// Folds the latest recorded change of (c1, c2) into S1, S2 and r, then sets
// K_i = r / S_i, or K1 = K2 = 1 while |S1 * S2| <= kPreferenceGuard.
void estimate_K(PreferenceState& pref, double gamma_pref);

// Gradients of each player's first-order loss change with respect to its own
// preference, evaluated on raw-loss derivatives. The opponent's preference is
// treated as c_{-i} = K_i c_i.
std::array<double, 2> c_gradients(const DerivativeBundle& raw, double c1, double c2, double K1,
                                  double K2, double alpha);

struct UpdateDiagnostics {
  double p = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double xi_norm = 0.0;           // raw simultaneous gradient
  double modified_xi_norm = 0.0;  // simultaneous gradient of (L1', L2')
  Vec dtheta1;
  Vec dtheta2;
  double dc1 = 0.0;
  double dc2 = 0.0;
  double L1 = 0.0;
  double L2 = 0.0;
  double L1_mod = 0.0;
  double L2_mod = 0.0;
  bool diverged = false;
};

struct AgentSpec {
  Rule rule = Rule::kSos;
  LearnerConfig config;
};

// Joint learning state. pref carries each player's current preference; it is
// zero for players whose rule has none.
struct LearnerState {
  Vec theta;
  PreferenceState pref;
  std::int64_t step = 0;
};

inline constexpr double kThetaDivergence = 1e6;
inline constexpr double kPreferenceDivergence = 1e3;

// Draws theta from player 1's init distribution and sets each player's
// preference from its own config (CPBOS and PBOS) or zero.
LearnerState init_state(const GameDefinition& game, const AgentSpec& player1,
                        const AgentSpec& player2, std::uint64_t seed);

// One simultaneous update. Both players read the shared pre-step parameters
// and the preference-modified losses under the current (c1, c2); each applies
// its own rule's block. Players running PBOS then update their preference.
// Diagnostics describe the pre-step point and the applied changes.
UpdateDiagnostics joint_step(LearnerState& state, const GameDefinition& game,
                             const AgentSpec& player1, const AgentSpec& player2);

// Self-play shorthands.
UpdateDiagnostics pbos_step(LearnerState& state, const GameDefinition& game,
                            const LearnerConfig& config);
UpdateDiagnostics cpbos_step(LearnerState& state, const GameDefinition& game,
                             const LearnerConfig& config);
UpdateDiagnostics crossplay_step(LearnerState& state, const GameDefinition& game,
                                 const AgentSpec& player1, const AgentSpec& player2);

}  // namespace pbos
