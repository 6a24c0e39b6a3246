#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "pbos/jet.hpp"

namespace pbos {

// 2x2 payoff tables. Row player is player 1; index [row][col].
struct BimatrixGame {
  std::array<std::array<double, 2>, 2> payoff1{};
  std::array<std::array<double, 2>, 2> payoff2{};

  bool operator==(const BimatrixGame&) const = default;
};

template <typename S>
using LossPair = std::array<S, 2>;

// A two-player differentiable game: (theta1, theta2) -> (L1, L2).
//
// The evaluator is stored twice, once over doubles (used by finite
// differences and reporting) and once over second-order jets (used by the
// derivative engine). Both come from the same generic loss functor.
class GameDefinition {
 public:
  using DoubleLoss =
      std::function<LossPair<double>(std::span<const double>, std::span<const double>)>;
  using JetLoss = std::function<LossPair<Jet>(std::span<const Jet>, std::span<const Jet>)>;

  GameDefinition(std::string name, int d1, int d2, DoubleLoss loss, JetLoss jet_loss,
                 std::optional<BimatrixGame> bimatrix = std::nullopt)
      : name_(std::move(name)),
        d1_(d1),
        d2_(d2),
        loss_(std::move(loss)),
        jet_loss_(std::move(jet_loss)),
        bimatrix_(bimatrix) {}

  const std::string& name() const { return name_; }
  int d1() const { return d1_; }
  int d2() const { return d2_; }
  int dim() const { return d1_ + d2_; }

  // Set when the game was built from a 2x2 payoff table.
  const std::optional<BimatrixGame>& bimatrix() const { return bimatrix_; }

  LossPair<double> losses(std::span<const double> theta1, std::span<const double> theta2) const {
    return loss_(theta1, theta2);
  }
  LossPair<Jet> losses(std::span<const Jet> theta1, std::span<const Jet> theta2) const {
    return jet_loss_(theta1, theta2);
  }

 private:
  std::string name_;
  int d1_;
  int d2_;
  DoubleLoss loss_;
  JetLoss jet_loss_;
  std::optional<BimatrixGame> bimatrix_;
};

// Wraps a functor with a templated
//   LossPair<S> operator()(std::span<const S>, std::span<const S>) const
// into a GameDefinition.
template <typename F>
GameDefinition make_game(std::string name, int d1, int d2, F functor,
                         std::optional<BimatrixGame> bimatrix = std::nullopt) {
  auto shared = std::make_shared<const F>(std::move(functor));
  return GameDefinition(
      std::move(name), d1, d2,
      [shared](std::span<const double> a, std::span<const double> b) {
        return (*shared)(a, b);
      },
      [shared](std::span<const Jet> a, std::span<const Jet> b) { return (*shared)(a, b); },
      bimatrix);
}

}  // namespace pbos
