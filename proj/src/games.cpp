#include "pbos/games.hpp"

#include <algorithm>
#include <random>

namespace pbos {

BimatrixGame matching_pennies_table() {
  return {{{{1.0, -1.0}, {-1.0, 1.0}}}, {{{-1.0, 1.0}, {1.0, -1.0}}}};
}

BimatrixGame stackelberg_leader_table() {
  return {{{{1.0, 3.0}, {2.0, 4.0}}}, {{{0.0, 2.0}, {1.0, 0.0}}}};
}

BimatrixGame stag_hunt_table() {
  return {{{{4.0, -10.0}, {3.0, 1.0}}}, {{{4.0, 3.0}, {-10.0, 1.0}}}};
}

BimatrixGame prisoners_dilemma_table() {
  return {{{{-1.0, -3.0}, {0.0, -2.0}}}, {{{-1.0, 0.0}, {-3.0, -2.0}}}};
}

GameDefinition tandem() { return make_game("tandem", 1, 1, TandemLoss{}); }

GameDefinition ipd(IpdSpec spec) {
  if (!(spec.discount >= 0.0 && spec.discount < 1.0)) {
    throw ConfigError("ipd discount must lie in [0, 1)");
  }
  return make_game("ipd", 5, 5, IpdLoss{spec});
}

GameDefinition matching_pennies() {
  return bimatrix_to_game(matching_pennies_table(), "matching_pennies");
}

GameDefinition ultimatum() { return make_game("ultimatum", 1, 1, UltimatumLoss{}); }

GameDefinition stackelberg_leader() {
  return bimatrix_to_game(stackelberg_leader_table(), "stackelberg");
}

GameDefinition stag_hunt() { return bimatrix_to_game(stag_hunt_table(), "stag_hunt"); }

GameDefinition bimatrix_to_game(const BimatrixGame& bm, std::string name) {
  return make_game(std::move(name), 1, 1, BimatrixLoss{bm}, bm);
}

LossPair<double> ipd_exact_loss(std::span<const double> theta1, std::span<const double> theta2,
                                IpdSpec spec) {
  if (theta1.size() != 5 || theta2.size() != 5) {
    throw ConfigError("ipd policies need exactly 5 logits per player");
  }
  return IpdLoss{spec}(theta1, theta2);
}

BimatrixGame random_bimatrix(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> entry(-7, 7);
  BimatrixGame bm;
  for (auto* table : {&bm.payoff1, &bm.payoff2}) {
    for (auto& row : *table) {
      for (auto& cell : row) cell = entry(rng);
    }
  }
  return bm;
}

const std::vector<std::string>& game_names() {
  static const std::vector<std::string> kNames{"tandem",          "ipd",         "ultimatum",
                                               "matching_pennies", "stackelberg", "stag_hunt"};
  return kNames;
}

GameDefinition game_by_name(const std::string& name) {
  if (name == "tandem") return tandem();
  if (name == "ipd") return ipd();
  if (name == "matching_pennies") return matching_pennies();
  if (name == "ultimatum") return ultimatum();
  if (name == "stackelberg") return stackelberg_leader();
  if (name == "stag_hunt") return stag_hunt();
  throw ConfigError("unknown game '" + name + "'");
}

bool is_symmetric_game(const std::string& name) {
  return name == "tandem" || name == "ipd" || name == "stag_hunt";
}

}  // namespace pbos
