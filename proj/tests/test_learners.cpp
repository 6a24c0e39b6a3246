#include <cmath>
#include <random>

#include "doctest.h"
#include "pbos/derivkit.hpp"
#include "pbos/errors.hpp"
#include "pbos/games.hpp"
#include "pbos/learners.hpp"
#include "support/oracles.hpp"

using namespace pbos;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Vec random_point(int d, std::mt19937_64& rng, double std = 1.0) {
  std::normal_distribution<double> normal(0.0, std);
  Vec x(d);
  for (int i = 0; i < d; ++i) x(i) = normal(rng);
  return x;
}

// L1 = x^2 + y, L2 = y^2 - x: no cross curvature anywhere.
GameDefinition decoupled() {
  return make_game("decoupled", 1, 1, [](auto a, auto b) {
    using S = std::decay_t<decltype(a[0])>;
    return LossPair<S>{a[0] * a[0] + b[0], b[0] * b[0] - a[0]};
  });
}

}  // namespace

TEST_CASE("modified losses") {
  const DerivativeBundle raw = eval_bundle(tandem(), vec({0.7}), vec({-0.2}));
  const DerivativeBundle same = modified_losses(raw, 0.0, 0.0);
  CHECK(same.loss1.value == raw.loss1.value);
  CHECK(same.loss2.h12 == raw.loss2.h12);

  const DerivativeBundle mod = modified_losses(raw, 1.0, 1.0);
  const double s = 0.5;
  CHECK(mod.loss1.value == doctest::Approx(2 * s * s - 2 * s));
  CHECK(mod.loss1.grad1(0) == doctest::Approx(4 * s - 2));
  CHECK(mod.loss2.value == doctest::Approx(2 * s * s - 2 * s));

  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    const Vec x = random_point(2, rng);
    const DerivativeBundle mp = modified_losses(eval_bundle(matching_pennies(), x), 1.0, 1.0);
    CHECK(std::abs(mp.loss1.grad1(0)) < 1e-15);
    CHECK(std::abs(mp.loss1.value) < 1e-15);
  }
}

TEST_CASE("maximization of cooperation: c2 L1' = L2' whenever c1 c2 = 1") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> cdist(0.2, 5.0);
  for (int k = 0; k < 100; ++k) {
    const std::string& name = game_names()[k % game_names().size()];
    const GameDefinition g = game_by_name(name);
    const double c1 = cdist(rng);
    const double c2 = 1.0 / c1;
    const DerivativeBundle m = modified_losses(eval_bundle(g, random_point(g.dim(), rng)), c1, c2);
    const double scale = 1.0 + std::abs(m.loss2.value);
    CHECK(std::abs(c2 * m.loss1.value - m.loss2.value) <= 1e-12 * scale);
    CHECK((c2 * m.loss1.grad1 - m.loss2.grad1).cwiseAbs().maxCoeff() <= 1e-11 * scale);
  }
}

TEST_CASE("sos on tandem at (1, 1)") {
  const DerivativeBundle b = eval_bundle(tandem(), vec({1.0}), vec({1.0}));
  const SosTerms t = sos_direction(b, 0.1, 0.5, 0.1);
  // Independent matrix form: xi = (2x+2y-2) each, H_o = [[0,2],[2,0]],
  // chi_i = d2/dx_i dx_-i (L_-i) * d/dx_-i (L_i) = 2 * 4.
  Eigen::Matrix2d ho;
  ho << 0, 2, 2, 0;
  const Eigen::Vector2d xi(2, 2);
  const Eigen::Vector2d xi0 = xi - 0.1 * ho * xi;
  const Eigen::Vector2d chi(8, 8);
  CHECK(t.xi(0) == doctest::Approx(2.0));
  CHECK(t.lookahead(0) == doctest::Approx(xi0(0)));
  CHECK(t.lookahead(0) == doctest::Approx(1.6));
  CHECK(t.shaping(0) == doctest::Approx(chi(0)));
  CHECK(t.shaping(1) == doctest::Approx(chi(1)));
  CHECK(t.p1 == doctest::Approx(1.0));
  CHECK(t.p2 == doctest::Approx(1.0));
  CHECK(t.p == doctest::Approx(1.0));
  CHECK(t.direction(0) == doctest::Approx(0.8));
  CHECK(t.direction(1) == doctest::Approx(0.8));
}

TEST_CASE("sos criterion limits") {
  // Decoupled losses: chi = 0, so the guard sets p1 = 1 and the direction is xi.
  const DerivativeBundle d = eval_bundle(decoupled(), vec({0.4}), vec({-0.3}));
  const SosTerms t = sos_direction(d, 0.1, 0.5, 0.1);
  CHECK(t.p1 == 1.0);
  CHECK((t.direction - simultaneous_gradient(d)).norm() < 1e-15);

  // Stationary point: p2 = 0 and the direction vanishes.
  const DerivativeBundle s = eval_bundle(tandem(), vec({0.3}), vec({0.7}));
  const SosTerms z = sos_direction(s, 0.1, 0.5, 0.1);
  CHECK(z.p2 == 0.0);
  CHECK(z.direction.norm() < 1e-15);

  const DerivativeBundle b = eval_bundle(stag_hunt(), vec({0.3}), vec({-0.4}));
  const SosTerms p0 = sos_direction(b, 0.2, 0.5, 0.1, 0.0);
  const SosTerms p1 = sos_direction(b, 0.2, 0.5, 0.1, 1.0);
  CHECK(p0.p == 0.0);
  CHECK((p0.direction - p0.lookahead).norm() < 1e-15);
  CHECK(p1.p == 1.0);
  CHECK((p1.direction - (p1.lookahead - 0.2 * p1.shaping)).norm() < 1e-14);
}

TEST_CASE("sos keeps every point of tandem's x + y = 1 line fixed") {
  for (double x : {-3.0, -0.5, 0.0, 0.4, 2.5}) {
    const DerivativeBundle b = eval_bundle(tandem(), vec({x}), vec({1.0 - x}));
    CHECK(sos_direction(b, 0.1, 0.5, 0.1).direction.norm() < 1e-12);
    CHECK(lola_direction(b, 0.1).norm() > 0.1);  // lola alone does not preserve them
    CHECK(cgd_direction(b, 0.1).norm() < 1e-12);
  }
}

TEST_CASE("lola and sos(p=1) match the differentiated surrogate at 20 points per game") {
  const double alpha = 0.3;
  std::mt19937_64 rng(31);
  for (const auto& name : game_names()) {
    oracle::with_game_functor(name, [&](const auto& loss, int d1, int d2) {
      const GameDefinition g = game_by_name(name);
      for (int k = 0; k < 20; ++k) {
        const Vec x = random_point(d1 + d2, rng);
        const Vec expected = oracle::lola_surrogate_gradient(loss, d1, d2, x, alpha);
        const DerivativeBundle b = eval_bundle(g, x);
        const Vec lola = lola_direction(b, alpha);
        const Vec sos = sos_direction(b, alpha, 0.5, 0.1, 1.0).direction;
        INFO(name << " point " << k);
        CHECK((lola - expected).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK((sos - expected).cwiseAbs().maxCoeff() <= 1e-8);
      }
    });
  }
}

TEST_CASE("cgd") {
  const DerivativeBundle d = eval_bundle(decoupled(), vec({0.4}), vec({-0.3}));
  CHECK((cgd_direction(d, 0.5) - simultaneous_gradient(d)).norm() < 1e-15);

  // Independent solve of the block system on a coupled game.
  std::mt19937_64 rng(4);
  const DerivativeBundle b = eval_bundle(ipd(), random_point(10, rng));
  const double alpha = 0.7;
  Mat m = Mat::Identity(10, 10);
  m.topRightCorner(5, 5) = alpha * b.loss1.h12;
  m.bottomLeftCorner(5, 5) = alpha * b.loss2.h21;
  const Vec v = cgd_direction(b, alpha);
  CHECK((m * v - simultaneous_gradient(b)).norm() < 1e-12);

  // Bilinear game with alpha * h = 1: [[1, 1], [1, 1]] is singular.
  const GameDefinition bilinear = make_game("bilinear", 1, 1, [](auto a, auto b) {
    using S = std::decay_t<decltype(a[0])>;
    return LossPair<S>{a[0] * b[0], a[0] * b[0]};
  });
  CHECK_THROWS_AS(cgd_direction(eval_bundle(bilinear, vec({1.0}), vec({1.0})), 1.0),
                  NumericalError);
}

TEST_CASE("estimate_K") {
  PreferenceState fresh;
  fresh.record();
  estimate_K(fresh, 0.9);
  CHECK(fresh.S1 == 0.0);
  CHECK(fresh.r == 0.0);
  CHECK(fresh.K1 == 1.0);
  CHECK(fresh.K2 == 1.0);

  // Equal moves: r = S1 = S2, so K = 1 once the guard releases too.
  PreferenceState equal;
  equal.record();
  for (int t = 0; t < 10; ++t) {
    equal.c1 += 0.3;
    equal.c2 += 0.3;
    equal.record();
    estimate_K(equal, 0.9);
  }
  CHECK(std::abs(equal.S1 * equal.S2) > kPreferenceGuard);
  CHECK(equal.K1 == doctest::Approx(1.0));
  CHECK(equal.K2 == doctest::Approx(1.0));

  // Two opposite moves of sizes 0.1 then 0.2 under gamma 0.9.
  PreferenceState opp;
  opp.record();
  const double d1[2] = {0.1, 0.2};
  const double d2[2] = {-0.1, -0.2};
  double s1 = 0.0;
  double s2 = 0.0;
  double r = 0.0;
  for (int t = 0; t < 2; ++t) {
    opp.c1 += d1[t];
    opp.c2 += d2[t];
    opp.record();
    estimate_K(opp, 0.9);
    s1 = 0.9 * s1 + d1[t] * d1[t];
    s2 = 0.9 * s2 + d2[t] * d2[t];
    r = 0.9 * r + d1[t] * d2[t];
  }
  CHECK(opp.S1 == doctest::Approx(0.049));
  CHECK(opp.S1 == doctest::Approx(s1));
  CHECK(opp.S2 == doctest::Approx(s2));
  CHECK(opp.r == doctest::Approx(-0.049));
  CHECK(opp.r == doctest::Approx(r));
  CHECK(opp.K1 == 1.0);
  CHECK(opp.K2 == 1.0);

  // Larger moves release the guard and give the regression ratio.
  PreferenceState big;
  big.record();
  for (int t = 0; t < 3; ++t) {
    big.c1 += 0.5;
    big.c2 -= 1.0;
    big.record();
    estimate_K(big, 0.9);
  }
  CHECK(big.K1 == doctest::Approx(-2.0));
  CHECK(big.K2 == doctest::Approx(-0.5));
}

TEST_CASE("c-gradients against the first-order loss change") {
  std::mt19937_64 rng(8);
  const double alpha = 0.2;
  for (const auto& name : game_names()) {
    const GameDefinition g = game_by_name(name);
    const DerivativeBundle raw = eval_bundle(g, random_point(g.dim(), rng));
    const double c1 = 0.7;
    const double c2 = -0.4;
    const double K1 = 1.3;
    const double K2 = 0.6;
    const DerivativeBundle mod = modified_losses(raw, c1, c2);
    // Change of L1' when player 1 steps on L1 + t L2 and player 2 on L2 + K1 t L1;
    // linear in t, so a central difference is exact up to rounding.
    auto dL1 = [&](double t) {
      const Vec step1 = -alpha * (raw.loss1.grad1 + t * raw.loss2.grad1);
      const Vec step2 = -alpha * (raw.loss2.grad2 + K1 * t * raw.loss1.grad2);
      return mod.loss1.grad1.dot(step1) + mod.loss1.grad2.dot(step2);
    };
    auto dL2 = [&](double t) {
      const Vec step1 = -alpha * (raw.loss1.grad1 + K2 * t * raw.loss2.grad1);
      const Vec step2 = -alpha * (raw.loss2.grad2 + t * raw.loss1.grad2);
      return mod.loss2.grad1.dot(step1) + mod.loss2.grad2.dot(step2);
    };
    const auto g12 = c_gradients(raw, c1, c2, K1, K2, alpha);
    INFO(name);
    CHECK(g12[0] == doctest::Approx((dL1(c1 + 0.5) - dL1(c1 - 0.5))).epsilon(1e-9).scale(1.0));
    CHECK(g12[1] == doctest::Approx((dL2(c2 + 0.5) - dL2(c2 - 0.5))).epsilon(1e-9).scale(1.0));
  }

  const DerivativeBundle still = eval_bundle(tandem(), vec({0.2}), vec({0.8}));
  const DerivativeBundle zero{modified_losses(still, 0.0, 0.0)};
  DerivativeBundle flat = zero;
  flat.loss1.grad1.setZero();
  flat.loss1.grad2.setZero();
  flat.loss2.grad1.setZero();
  flat.loss2.grad2.setZero();
  const auto g0 = c_gradients(flat, 0.5, 0.5, 1.0, 1.0, 0.1);
  CHECK(g0[0] == 0.0);
  CHECK(g0[1] == 0.0);

  const DerivativeBundle mp = eval_bundle(matching_pennies(), vec({0.9}), vec({-1.7}));
  const auto gm = c_gradients(mp, 1.0, 1.0, 1.0, 1.0, 0.1);
  CHECK(std::abs(gm[0]) < 1e-15);
  CHECK(std::abs(gm[1]) < 1e-15);
}

TEST_CASE("pbos with frozen preferences replays sos exactly") {
  for (const std::string name : {"tandem", "stag_hunt", "ipd"}) {
    const GameDefinition g = game_by_name(name);
    LearnerConfig cfg;
    cfg.beta0 = 0.0;
    const AgentSpec pbos{Rule::kPbos, cfg};
    const AgentSpec sos{Rule::kSos, cfg};
    LearnerState a = init_state(g, pbos, pbos, 3);
    LearnerState b = init_state(g, sos, sos, 3);
    REQUIRE(a.theta == b.theta);
    for (int t = 0; t < 200; ++t) {
      pbos_step(a, g, cfg);
      joint_step(b, g, sos, sos);
    }
    CHECK(a.theta == b.theta);
    CHECK(a.pref.c1 == 0.0);
    CHECK(a.pref.c2 == 0.0);
  }
}

TEST_CASE("cpbos keeps preferences fixed and steps sos on modified losses") {
  const GameDefinition g = tandem();
  LearnerConfig cfg;
  cfg.c_init = {1.0, 1.0};
  const AgentSpec cpbos{Rule::kCpbos, cfg};
  LearnerState s = init_state(g, cpbos, cpbos, 5);
  const Vec before = s.theta;
  const DerivativeBundle mod = modified_losses(eval_bundle(g, before), 1.0, 1.0);
  const Vec expected = before - cfg.alpha * sos_direction(mod, cfg.alpha, cfg.a, cfg.b).direction;
  cpbos_step(s, g, cfg);
  CHECK((s.theta - expected).norm() < 1e-14);
  CHECK(s.pref.c1 == 1.0);
  CHECK(s.pref.c2 == 1.0);
}

TEST_CASE("cross-play applies each player's own block") {
  const GameDefinition g = stag_hunt();
  LearnerConfig cfg;
  const AgentSpec p1{Rule::kPbos, cfg};
  const AgentSpec p2{Rule::kLola, cfg};
  LearnerState s = init_state(g, p1, p2, 9);
  const Vec before = s.theta;
  const DerivativeBundle raw = eval_bundle(g, before);
  const Vec sos = sos_direction(raw, cfg.alpha, cfg.a, cfg.b).direction;  // c1 = 0 initially
  const Vec lola = lola_direction(raw, cfg.alpha);
  crossplay_step(s, g, p1, p2);
  CHECK(s.theta(0) == doctest::Approx(before(0) - cfg.alpha * sos(0)).epsilon(1e-14));
  CHECK(s.theta(1) == doctest::Approx(before(1) - cfg.alpha * lola(1)).epsilon(1e-14));
  CHECK(s.pref.c2 == 0.0);
}

TEST_CASE("preference updates are tiny relative to parameter updates at small rates") {
  const GameDefinition g = tandem();
  LearnerConfig cfg;
  cfg.alpha = 1e-3;
  cfg.beta0 = 1e-4;
  LearnerState s = init_state(g, {Rule::kPbos, cfg}, {Rule::kPbos, cfg}, 12);
  double max_dc = 0.0;
  double max_dtheta = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const UpdateDiagnostics d = pbos_step(s, g, cfg);
    max_dc = std::max({max_dc, std::abs(d.dc1), std::abs(d.dc2)});
    max_dtheta = std::max({max_dtheta, d.dtheta1.cwiseAbs().maxCoeff(),
                           d.dtheta2.cwiseAbs().maxCoeff()});
  }
  CHECK(max_dtheta > 0.0);
  CHECK(max_dc / max_dtheta < 0.1);
}

TEST_CASE("learner config validation") {
  LearnerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.a = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.beta0 = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.gamma_pref = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK(rule_from_string("pbos") == Rule::kPbos);
  CHECK(to_string(Rule::kCgd) == "cgd");
  CHECK_THROWS_AS(rule_from_string("adam"), ConfigError);
}

TEST_CASE("c-gradients reduce to the closed form at modified stationarity") {
  // Build raw gradients with grad_1 L1' = 0 and grad_2 L2' = 0 by construction.
  std::mt19937_64 rng(21);
  const double alpha = 0.3;
  const double beta = 0.05;
  for (int k = 0; k < 50; ++k) {
    std::uniform_real_distribution<double> cdist(-3.0, 3.0);
    const double c1 = cdist(rng);
    const double c2 = cdist(rng);
    const double K1 = cdist(rng);
    const double K2 = cdist(rng);
    if (std::abs(c1) < 0.1) continue;
    const Vec w = random_point(2, rng);
    const Vec v = random_point(3, rng);
    DerivativeBundle b;
    b.loss1.grad1 = w;
    b.loss2.grad1 = -w / c1;
    b.loss1.grad2 = v;
    b.loss2.grad2 = -c2 * v;
    const auto g = c_gradients(b, c1, c2, K1, K2, alpha);
    const double dc1 = -beta * g[0];
    const double dc2 = -beta * g[1];
    const double expect1 = alpha * beta * (1 - c1 * c2) * K1 * b.loss1.grad2.squaredNorm();
    const double expect2 = alpha * beta * (1 - c1 * c2) * K2 * b.loss2.grad1.squaredNorm();
    CHECK(dc1 == doctest::Approx(expect1).epsilon(1e-12).scale(1.0));
    CHECK(dc2 == doctest::Approx(expect2).epsilon(1e-12).scale(1.0));
  }
}
