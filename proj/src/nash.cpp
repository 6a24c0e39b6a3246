#include "pbos/nash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "pbos/errors.hpp"

namespace pbos {

std::array<double, 2> expected_losses(const BimatrixGame& bm, double p1, double p2) {
  const std::array<double, 2> row{p1, 1.0 - p1};
  const std::array<double, 2> col{p2, 1.0 - p2};
  std::array<double, 2> out{0.0, 0.0};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      out[0] -= row[i] * col[j] * bm.payoff1[i][j];
      out[1] -= row[i] * col[j] * bm.payoff2[i][j];
    }
  }
  return out;
}

double best_response_gain(const BimatrixGame& bm, double p1, double p2) {
  const auto base = expected_losses(bm, p1, p2);
  double gain = 0.0;
  for (double pure : {0.0, 1.0}) {
    gain = std::max(gain, base[0] - expected_losses(bm, pure, p2)[0]);
    gain = std::max(gain, base[1] - expected_losses(bm, p1, pure)[1]);
  }
  return gain;
}

namespace {

// {x in [0, 1] : f0 + x (f1 - f0) >= 0}, as a closed interval if nonempty.
std::optional<std::pair<double, double>> nonnegative_interval(double f0, double f1) {
  if (f0 >= 0.0 && f1 >= 0.0) return std::pair{0.0, 1.0};
  if (f0 < 0.0 && f1 < 0.0) return std::nullopt;
  const double root = f0 / (f0 - f1);
  return f0 >= 0.0 ? std::pair{0.0, root} : std::pair{root, 1.0};
}

bool is_pure(double p) { return p == 0.0 || p == 1.0; }

}  // namespace

NashSet enumerate_nash(const BimatrixGame& bm) {
  const auto& u = bm.payoff1;
  const auto& v = bm.payoff2;
  NashSet result;
  std::vector<std::pair<double, double>> profiles;

  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (u[i][j] >= u[1 - i][j] && v[i][j] >= v[i][1 - j]) {
        profiles.emplace_back(i == 0 ? 1.0 : 0.0, j == 0 ? 1.0 : 0.0);
      }
    }
  }

  // Player 1 indifferent against pure column j: any row mix that keeps j a
  // best response for player 2 is an equilibrium.
  for (int j = 0; j < 2; ++j) {
    if (u[0][j] != u[1][j]) continue;
    result.degenerate = true;
    const double q = j == 0 ? 1.0 : 0.0;
    // f(p) = advantage of column j for player 2 when row 0 has probability p.
    const double f_at0 = v[1][j] - v[1][1 - j];
    const double f_at1 = v[0][j] - v[0][1 - j];
    if (const auto range = nonnegative_interval(f_at0, f_at1)) {
      profiles.emplace_back(range->first, q);
      profiles.emplace_back(range->second, q);
    }
  }
  for (int i = 0; i < 2; ++i) {
    if (v[i][0] != v[i][1]) continue;
    result.degenerate = true;
    const double p = i == 0 ? 1.0 : 0.0;
    const double g_at0 = u[i][1] - u[1 - i][1];
    const double g_at1 = u[i][0] - u[1 - i][0];
    if (const auto range = nonnegative_interval(g_at0, g_at1)) {
      profiles.emplace_back(p, range->first);
      profiles.emplace_back(p, range->second);
    }
  }

  // Interior point: each player's mix makes the other indifferent.
  const double den_p = v[0][0] - v[0][1] - v[1][0] + v[1][1];
  const double den_q = u[0][0] - u[0][1] - u[1][0] + u[1][1];
  if (den_p != 0.0 && den_q != 0.0) {
    const double p = (v[1][1] - v[1][0]) / den_p;
    const double q = (u[1][1] - u[0][1]) / den_q;
    if (p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0) profiles.emplace_back(p, q);
  }

  std::sort(profiles.begin(), profiles.end());
  constexpr double kSame = 1e-12;
  for (const auto& [p, q] : profiles) {
    if (!result.points.empty() && std::abs(result.points.back().p1 - p) < kSame &&
        std::abs(result.points.back().p2 - q) < kSame) {
      continue;
    }
    NashPoint point;
    point.p1 = p;
    point.p2 = q;
    point.kind = is_pure(p) && is_pure(q) ? NashKind::kPure : NashKind::kMixed;
    point.expected_losses = expected_losses(bm, p, q);
    result.points.push_back(point);
  }
  return result;
}

double best_ne_metric(std::span<const BimatrixGame> games, BestNeReading reading) {
  if (games.empty()) throw ConfigError("best_ne_metric needs at least one game");
  double total = 0.0;
  for (const BimatrixGame& bm : games) {
    const NashSet eq = enumerate_nash(bm);
    double best_joint = std::numeric_limits<double>::infinity();
    double best1 = best_joint;
    double best2 = best_joint;
    for (const NashPoint& point : eq.points) {
      const auto& l = point.expected_losses;
      best_joint = std::min(best_joint, 0.5 * (l[0] + l[1]));
      best1 = std::min(best1, l[0]);
      best2 = std::min(best2, l[1]);
    }
    total += reading == BestNeReading::kMinJointLoss ? best_joint : 0.5 * (best1 + best2);
  }
  return total / static_cast<double>(games.size());
}

}  // namespace pbos
