#pragma once

// The game suite. Every game is defined by a generic loss functor that can be
// instantiated over any scalar supporting +, -, *, /, sigmoid and value_of;
// the functors are public so that independent derivative oracles can
// instantiate them with their own scalar types.
//
// Losses are negated expected payoffs. Probability-valued strategies are
// logits squashed by the logistic function.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pbos/errors.hpp"
#include "pbos/game.hpp"
#include "pbos/jet.hpp"

namespace pbos {

// L1 = (x+y)^2 - 2x, L2 = (x+y)^2 - 2y.
struct TandemLoss {
  template <typename S>
  LossPair<S> operator()(std::span<const S> a, std::span<const S> b) const {
    const S sum = a[0] + b[0];
    const S sq = sum * sum;
    return {sq - 2.0 * a[0], sq - 2.0 * b[0]};
  }
};

// Expected loss of a 2x2 table under independent mixing; theta_i is the
// logit of choosing the first row (player 1) or first column (player 2).
struct BimatrixLoss {
  BimatrixGame table;

  template <typename S>
  LossPair<S> operator()(std::span<const S> a, std::span<const S> b) const {
    const S p = sigmoid(a[0]);
    const S q = sigmoid(b[0]);
    const S w00 = p * q;
    const S w01 = p * (1.0 - q);
    const S w10 = (1.0 - p) * q;
    const S w11 = (1.0 - p) * (1.0 - q);
    const auto& u = table.payoff1;
    const auto& v = table.payoff2;
    return {-(u[0][0] * w00 + u[0][1] * w01 + u[1][0] * w10 + u[1][1] * w11),
            -(v[0][0] * w00 + v[0][1] * w01 + v[1][0] * w10 + v[1][1] * w11)};
  }
};

// Ten-dollar ultimatum: player 1 proposes fair (5/5) with probability
// sigmoid(theta1) or unfair (8/2); player 2 accepts an unfair offer with
// probability sigmoid(theta2). Fair offers are always accepted.
struct UltimatumLoss {
  template <typename S>
  LossPair<S> operator()(std::span<const S> a, std::span<const S> b) const {
    const S fair = sigmoid(a[0]);
    const S accept = sigmoid(b[0]);
    const S unfair_accepted = (1.0 - fair) * accept;
    return {-(5.0 * fair + 8.0 * unfair_accepted), -(5.0 * fair + 2.0 * unfair_accepted)};
  }
};

struct IpdSpec {
  double discount = 0.96;
};

// Joint-action states, player 1's action first.
enum class IpdState : int { kCC = 0, kCD = 1, kDC = 2, kDD = 3 };

// Per-step stage losses indexed by IpdState.
inline constexpr std::array<double, 4> kIpdStageLoss1{1.0, 3.0, 0.0, 2.0};
inline constexpr std::array<double, 4> kIpdStageLoss2{1.0, 0.0, 3.0, 2.0};

namespace detail {

// Solves A x = rhs in place by Gaussian elimination with partial pivoting on
// the value part. A is row-major n x n.
template <typename S, std::size_t N>
std::array<S, N> solve_dense(std::array<std::array<S, N>, N> a, std::array<S, N> rhs) {
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < N; ++row) {
      if (std::abs(value_of(a[row][col])) > std::abs(value_of(a[pivot][col]))) pivot = row;
    }
    const double pivot_mag = std::abs(value_of(a[pivot][col]));
    if (!(pivot_mag > 1e-300)) {
      throw NumericalError("singular system in discounted Markov-chain solve", pivot_mag);
    }
    std::swap(a[pivot], a[col]);
    std::swap(rhs[pivot], rhs[col]);
    for (std::size_t row = col + 1; row < N; ++row) {
      const S factor = a[row][col] / a[col][col];
      for (std::size_t k = col; k < N; ++k) a[row][k] = a[row][k] - factor * a[col][k];
      rhs[row] = rhs[row] - factor * rhs[col];
    }
  }
  std::array<S, N> x{};
  for (std::size_t i = N; i-- > 0;) {
    S acc = rhs[i];
    for (std::size_t k = i + 1; k < N; ++k) acc = acc - a[i][k] * x[k];
    x[i] = acc / a[i][i];
  }
  return x;
}

}  // namespace detail

// Iterated prisoner's dilemma with memory-one policies.
//
// Each player holds five logits, read from that player's own perspective:
// cooperation probability at the initial state, then after (own, opponent)
// = CC, CD, DC, DD. The joint play is a 4-state Markov chain over IpdState;
// the loss is the discounted stage loss normalized by (1 - discount), so a
// constant per-step loss v yields exactly v.
struct IpdLoss {
  IpdSpec spec;

  template <typename S>
  LossPair<S> operator()(std::span<const S> a, std::span<const S> b) const {
    // Player 2 sees joint state CD as its own DC and vice versa.
    static constexpr std::array<int, 4> kOpponentView{0, 2, 1, 3};
    std::array<S, 5> coop1;
    std::array<S, 5> coop2;
    for (int k = 0; k < 5; ++k) {
      coop1[k] = sigmoid(a[k]);
      coop2[k] = sigmoid(b[k]);
    }
    const auto joint = [](const S& x, const S& y) {
      return std::array<S, 4>{x * y, x * (1.0 - y), (1.0 - x) * y, (1.0 - x) * (1.0 - y)};
    };
    const std::array<S, 4> initial = joint(coop1[0], coop2[0]);

    // system = (I - discount * P)^T, so that system * x = initial gives the
    // discounted state occupancy x^T = initial^T (I - discount * P)^{-1}.
    std::array<std::array<S, 4>, 4> system;
    for (int from = 0; from < 4; ++from) {
      const std::array<S, 4> next = joint(coop1[1 + from], coop2[1 + kOpponentView[from]]);
      for (int to = 0; to < 4; ++to) {
        S entry = -spec.discount * next[to];
        if (from == to) entry = entry + 1.0;
        system[to][from] = entry;
      }
    }
    const std::array<S, 4> occupancy = detail::solve_dense(system, initial);
    S loss1 = 0.0;
    S loss2 = 0.0;
    for (int s = 0; s < 4; ++s) {
      loss1 = loss1 + kIpdStageLoss1[s] * occupancy[s];
      loss2 = loss2 + kIpdStageLoss2[s] * occupancy[s];
    }
    const double norm = 1.0 - spec.discount;
    return {norm * loss1, norm * loss2};
  }
};

// Payoff tables of the named 2x2 games.
BimatrixGame matching_pennies_table();
BimatrixGame stackelberg_leader_table();
BimatrixGame stag_hunt_table();
BimatrixGame prisoners_dilemma_table();

GameDefinition tandem();
GameDefinition ipd(IpdSpec spec = {});
GameDefinition matching_pennies();
GameDefinition ultimatum();
GameDefinition stackelberg_leader();
GameDefinition stag_hunt();
GameDefinition bimatrix_to_game(const BimatrixGame& bm, std::string name = "bimatrix");

// Closed-form normalized discounted IPD losses for the given logits.
LossPair<double> ipd_exact_loss(std::span<const double> theta1, std::span<const double> theta2,
                                IpdSpec spec = {});

// Eight independent uniform integer payoffs in [-7, 7]; deterministic per seed.
BimatrixGame random_bimatrix(std::uint64_t seed);

// Names accepted by game_by_name: tandem, ipd, matching_pennies, ultimatum,
// stackelberg, stag_hunt.
const std::vector<std::string>& game_names();
GameDefinition game_by_name(const std::string& name);

// Games whose losses swap when the parameter blocks swap.
bool is_symmetric_game(const std::string& name);

}  // namespace pbos
