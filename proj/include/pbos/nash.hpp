#pragma once

// Exact Nash equilibria of 2x2 bimatrix games and the best-equilibrium
// benchmark reference.

#include <array>
#include <span>
#include <vector>

#include "pbos/game.hpp"

namespace pbos {

enum class NashKind { kPure, kMixed };

struct NashPoint {
  double p1 = 0.0;  // probability of player 1's first row
  double p2 = 0.0;  // probability of player 2's first column
  NashKind kind = NashKind::kPure;
  std::array<double, 2> expected_losses{};  // negated expected payoffs
};

struct NashSet {
  std::vector<NashPoint> points;  // sorted by (p1, p2), duplicates removed
  // Set when some player is indifferent along a whole edge or face, in which
  // case equilibria form a continuum. Its extreme points are returned.
  bool degenerate = false;
};

// Expected losses at mixed profile (p1, p2).
std::array<double, 2> expected_losses(const BimatrixGame& bm, double p1, double p2);

// Pure cells, the interior indifference point, and in degenerate games the
// endpoints of every equilibrium segment along an edge.
NashSet enumerate_nash(const BimatrixGame& bm);

// Largest decrease of either player's loss achievable by a unilateral pure
// deviation from (p1, p2). Zero (up to rounding) at an equilibrium.
double best_response_gain(const BimatrixGame& bm, double p1, double p2);

enum class BestNeReading {
  // min over equilibria of (L1 + L2) / 2, averaged over games.
  kMinJointLoss,
  // (min over equilibria of L1 + min over equilibria of L2) / 2, averaged.
  kSeparateMinima,
};

double best_ne_metric(std::span<const BimatrixGame> games,
                      BestNeReading reading = BestNeReading::kMinJointLoss);

}  // namespace pbos
