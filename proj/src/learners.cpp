#include "pbos/learners.hpp"

#include <Eigen/LU>

#include <cmath>
#include <random>

#include "pbos/errors.hpp"

namespace pbos {

std::string to_string(Rule rule) {
  switch (rule) {
    case Rule::kNaive: return "naive";
    case Rule::kLola: return "lola";
    case Rule::kSos: return "sos";
    case Rule::kCgd: return "cgd";
    case Rule::kCpbos: return "cpbos";
    case Rule::kPbos: return "pbos";
  }
  return "unknown";
}

Rule rule_from_string(const std::string& name) {
  for (Rule r : {Rule::kNaive, Rule::kLola, Rule::kSos, Rule::kCgd, Rule::kCpbos, Rule::kPbos}) {
    if (to_string(r) == name) return r;
  }
  throw ConfigError("unknown rule '" + name + "'");
}

bool uses_preferences(Rule rule) { return rule == Rule::kCpbos || rule == Rule::kPbos; }

void LearnerConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(alpha > 0.0 && std::isfinite(alpha), "alpha must be positive");
  require(beta0 >= 0.0 && std::isfinite(beta0), "beta0 must be non-negative");
  require(beta_decay > 0.0 && beta_decay <= 1.0, "beta_decay must lie in (0, 1]");
  require(a > 0.0 && a < 1.0, "a must lie in (0, 1)");
  require(b > 0.0 && b < 1.0, "b must lie in (0, 1)");
  require(gamma_pref >= 0.0 && gamma_pref <= 1.0, "gamma_pref must lie in [0, 1]");
  require(std::isfinite(c_init[0]) && std::isfinite(c_init[1]), "c_init must be finite");
  require(theta_init_std >= 0.0 && std::isfinite(theta_init_mean),
          "theta init distribution is invalid");
  require(max_steps >= 1, "max_steps must be at least 1");
}

DerivativeBundle modified_losses(const DerivativeBundle& bundle, double c1, double c2) {
  return {bundle.loss1.plus_scaled(bundle.loss2, c1), bundle.loss2.plus_scaled(bundle.loss1, c2)};
}

Vec simultaneous_gradient(const DerivativeBundle& bundle) {
  Vec xi(bundle.d1() + bundle.d2());
  xi << bundle.loss1.grad1, bundle.loss2.grad2;
  return xi;
}

SosTerms sos_direction(const DerivativeBundle& bundle, double alpha, double a, double b,
                       std::optional<double> forced_p) {
  const LossDerivatives& l1 = bundle.loss1;
  const LossDerivatives& l2 = bundle.loss2;
  const int d1 = bundle.d1();
  const int d2 = bundle.d2();

  SosTerms out;
  out.xi = simultaneous_gradient(bundle);

  // H_o xi with H_o = [[0, h12(L1)], [h21(L2), 0]].
  Vec off_diag_xi(d1 + d2);
  off_diag_xi << l1.h12 * l2.grad2, l2.h21 * l1.grad1;
  out.lookahead = out.xi - alpha * off_diag_xi;

  out.shaping.resize(d1 + d2);
  out.shaping << l2.h12 * l1.grad2, l1.h21 * l2.grad1;

  const double inner = (-alpha * out.shaping).dot(out.lookahead);
  if (inner >= 0.0) {
    // inner == 0 also lands here: nothing to trade off against.
    out.p1 = 1.0;
  } else {
    out.p1 = std::min(1.0, -a * out.lookahead.squaredNorm() / inner);
  }
  const double xi_norm = out.xi.norm();
  out.p2 = xi_norm < b ? xi_norm * xi_norm : 1.0;
  out.p = forced_p.value_or(std::min(out.p1, out.p2));
  out.direction = out.lookahead - out.p * alpha * out.shaping;
  return out;
}

Vec lola_direction(const DerivativeBundle& bundle, double alpha) {
  return sos_direction(bundle, alpha, 0.5, 0.5, 1.0).direction;
}

Vec cgd_direction(const DerivativeBundle& bundle, double alpha) {
  const int d1 = bundle.d1();
  const int d2 = bundle.d2();
  Mat system = Mat::Identity(d1 + d2, d1 + d2);
  system.topRightCorner(d1, d2) = alpha * bundle.loss1.h12;
  system.bottomLeftCorner(d2, d1) = alpha * bundle.loss2.h21;
  const Eigen::PartialPivLU<Mat> lu(system);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-12)) {
    throw NumericalError("competitive gradient system is singular (rcond " +
                             std::to_string(rcond) + ")",
                         rcond > 0.0 ? 1.0 / rcond : INFINITY);
  }
  return lu.solve(simultaneous_gradient(bundle));
}

void PreferenceState::record() {
  history[0] = history[1];
  history[1] = {c1, c2};
  ++recorded;
}

void estimate_K(PreferenceState& pref, double gamma_pref) {
  if (pref.recorded >= 2) {
    const double d1 = pref.history[1][0] - pref.history[0][0];
    const double d2 = pref.history[1][1] - pref.history[0][1];
    pref.S1 = gamma_pref * pref.S1 + d1 * d1;
    pref.S2 = gamma_pref * pref.S2 + d2 * d2;
    pref.r = gamma_pref * pref.r + d1 * d2;
  }
  if (std::abs(pref.S1 * pref.S2) <= kPreferenceGuard) {
    pref.K1 = 1.0;
    pref.K2 = 1.0;
  } else {
    pref.K1 = pref.r / pref.S1;
    pref.K2 = pref.r / pref.S2;
  }
}

std::array<double, 2> c_gradients(const DerivativeBundle& raw, double c1, double c2, double K1,
                                  double K2, double alpha) {
  const LossDerivatives& l1 = raw.loss1;
  const LossDerivatives& l2 = raw.loss2;
  const Vec mod1_grad1 = l1.grad1 + c1 * l2.grad1;
  const Vec mod1_grad2 = l1.grad2 + c1 * l2.grad2;
  const Vec mod2_grad1 = l2.grad1 + c2 * l1.grad1;
  const Vec mod2_grad2 = l2.grad2 + c2 * l1.grad2;
  const double g1 = mod1_grad1.dot(-alpha * l2.grad1) + mod1_grad2.dot(-alpha * K1 * l1.grad2);
  const double g2 = mod2_grad1.dot(-alpha * K2 * l2.grad1) + mod2_grad2.dot(-alpha * l1.grad2);
  return {g1, g2};
}

LearnerState init_state(const GameDefinition& game, const AgentSpec& player1,
                        const AgentSpec& player2, std::uint64_t seed) {
  player1.config.validate();
  player2.config.validate();
  LearnerState state;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(player1.config.theta_init_mean,
                                          player1.config.theta_init_std);
  state.theta.resize(game.dim());
  for (int i = 0; i < game.dim(); ++i) {
    state.theta(i) = player1.config.theta_init_std > 0.0 ? normal(rng)
                                                         : player1.config.theta_init_mean;
  }
  state.pref.c1 = uses_preferences(player1.rule) ? player1.config.c_init[0] : 0.0;
  state.pref.c2 = uses_preferences(player2.rule) ? player2.config.c_init[1] : 0.0;
  state.pref.beta = {player1.config.beta0, player2.config.beta0};
  state.pref.record();
  return state;
}

namespace {

// Full joint update direction (before scaling by -alpha) of one rule.
Vec rule_direction(Rule rule, const DerivativeBundle& view, const LearnerConfig& cfg) {
  switch (rule) {
    case Rule::kNaive: return simultaneous_gradient(view);
    case Rule::kLola: return lola_direction(view, cfg.alpha);
    case Rule::kCgd: return cgd_direction(view, cfg.alpha);
    case Rule::kSos:
    case Rule::kCpbos:
    case Rule::kPbos: return sos_direction(view, cfg.alpha, cfg.a, cfg.b).direction;
  }
  return {};
}

bool is_sos_family(Rule rule) {
  return rule == Rule::kSos || rule == Rule::kCpbos || rule == Rule::kPbos;
}

}  // namespace

UpdateDiagnostics joint_step(LearnerState& state, const GameDefinition& game,
                             const AgentSpec& player1, const AgentSpec& player2) {
  const int d1 = game.d1();
  const int d2 = game.d2();
  PreferenceState& pref = state.pref;

  const DerivativeBundle raw = eval_bundle(game, state.theta);
  const DerivativeBundle view = modified_losses(raw, pref.c1, pref.c2);

  UpdateDiagnostics diag;
  diag.L1 = raw.loss1.value;
  diag.L2 = raw.loss2.value;
  diag.L1_mod = view.loss1.value;
  diag.L2_mod = view.loss2.value;
  diag.xi_norm = simultaneous_gradient(raw).norm();

  // The reported SOS criterion is the one of the first SOS-family player.
  const AgentSpec& reporter = is_sos_family(player1.rule) || !is_sos_family(player2.rule)
                                  ? player1
                                  : player2;
  const SosTerms terms =
      sos_direction(view, reporter.config.alpha, reporter.config.a, reporter.config.b);
  diag.modified_xi_norm = terms.xi.norm();
  diag.p = terms.p;
  diag.p1 = terms.p1;
  diag.p2 = terms.p2;

  const Vec dir1 = rule_direction(player1.rule, view, player1.config);
  const Vec dir2 = player2.rule == player1.rule && player2.config.alpha == player1.config.alpha &&
                           player2.config.a == player1.config.a &&
                           player2.config.b == player1.config.b
                       ? dir1
                       : rule_direction(player2.rule, view, player2.config);
  diag.dtheta1 = -player1.config.alpha * dir1.head(d1);
  diag.dtheta2 = -player2.config.alpha * dir2.tail(d2);

  const bool learn1 = player1.rule == Rule::kPbos;
  const bool learn2 = player2.rule == Rule::kPbos;
  if (learn1 || learn2) {
    estimate_K(pref, (learn1 ? player1 : player2).config.gamma_pref);
    const auto g1 = c_gradients(raw, pref.c1, pref.c2, pref.K1, pref.K2, player1.config.alpha);
    const auto g2 = c_gradients(raw, pref.c1, pref.c2, pref.K1, pref.K2, player2.config.alpha);
    if (learn1) {
      diag.dc1 = -pref.beta[0] * g1[0];
      pref.beta[0] *= player1.config.beta_decay;
    }
    if (learn2) {
      diag.dc2 = -pref.beta[1] * g2[1];
      pref.beta[1] *= player2.config.beta_decay;
    }
    pref.c1 += diag.dc1;
    pref.c2 += diag.dc2;
    pref.record();
  }
  ++pref.t;

  state.theta.head(d1) += diag.dtheta1;
  state.theta.tail(d2) += diag.dtheta2;
  ++state.step;

  const bool finite = state.theta.allFinite() && std::isfinite(pref.c1) && std::isfinite(pref.c2);
  diag.diverged = !finite || state.theta.cwiseAbs().maxCoeff() > kThetaDivergence ||
                  std::abs(pref.c1) > kPreferenceDivergence ||
                  std::abs(pref.c2) > kPreferenceDivergence;
  return diag;
}

UpdateDiagnostics pbos_step(LearnerState& state, const GameDefinition& game,
                            const LearnerConfig& config) {
  const AgentSpec agent{Rule::kPbos, config};
  return joint_step(state, game, agent, agent);
}

UpdateDiagnostics cpbos_step(LearnerState& state, const GameDefinition& game,
                             const LearnerConfig& config) {
  const AgentSpec agent{Rule::kCpbos, config};
  return joint_step(state, game, agent, agent);
}

UpdateDiagnostics crossplay_step(LearnerState& state, const GameDefinition& game,
                                 const AgentSpec& player1, const AgentSpec& player2) {
  return joint_step(state, game, player1, player2);
}

}  // namespace pbos
