#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "pbos/derivkit.hpp"
#include "pbos/errors.hpp"
#include "pbos/games.hpp"
#include "pbos/harness.hpp"
#include "pbos/json_io.hpp"
#include "pbos/nash.hpp"
#include "pbos/verify.hpp"

namespace py = pybind11;
using namespace pbos;

namespace {

ExperimentConfig make_config(const std::string& game, const std::string& rule,
                             const std::optional<std::string>& opponent,
                             const std::string& overrides_json) {
  const Rule r = rule_from_string(rule);
  ExperimentConfig cfg =
      opponent ? default_crossplay(game, rule_from_string(*opponent)) : default_experiment(game, r);
  if (opponent) cfg.rule = r;
  if (!overrides_json.empty()) merge_experiment(nlohmann::json::parse(overrides_json), cfg);
  return cfg;
}

py::dict run_to_dict(const RunResult& run) {
  const std::size_t n = run.records.size();
  std::vector<double> step(n), L1(n), L2(n), c1(n), c2(n), K1(n), K2(n), p(n), xi(n), mxi(n);
  const int dim = n == 0 ? 0 : static_cast<int>(run.records.front().theta.size());
  Mat theta(static_cast<Eigen::Index>(n), dim);
  for (std::size_t i = 0; i < n; ++i) {
    const RunRecord& r = run.records[i];
    step[i] = static_cast<double>(r.step);
    L1[i] = r.L1;
    L2[i] = r.L2;
    c1[i] = r.c1;
    c2[i] = r.c2;
    K1[i] = r.K1;
    K2[i] = r.K2;
    p[i] = r.p;
    xi[i] = r.xi_norm;
    mxi[i] = r.modified_xi_norm;
    for (int j = 0; j < dim; ++j) theta(static_cast<Eigen::Index>(i), j) = r.theta[j];
  }
  py::dict out;
  out["step"] = step;
  out["L1"] = L1;
  out["L2"] = L2;
  out["c1"] = c1;
  out["c2"] = c2;
  out["K1"] = K1;
  out["K2"] = K2;
  out["p"] = p;
  out["xi_norm"] = xi;
  out["modified_xi_norm"] = mxi;
  out["theta"] = theta;
  const auto f = run.final_losses();
  out["final_losses"] = py::make_tuple(f[0], f[1]);
  out["final_c"] = py::make_tuple(run.final_state.pref.c1, run.final_state.pref.c2);
  out["diverged"] = run.diverged;
  out["error"] = run.error;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Opponent shaping with learned preferences: native core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<EvaluationError>(m, "EvaluationError", PyExc_ArithmeticError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("game_names", &game_names);
  m.def("rule_names", [] {
    return std::vector<std::string>{"naive", "lola", "sos", "cgd", "cpbos", "pbos"};
  });

  m.def(
      "losses",
      [](const std::string& game, const Vec& theta) {
        const GameDefinition g = game_by_name(game);
        if (theta.size() != g.dim()) throw ConfigError("theta has the wrong length for " + game);
        const auto l = g.losses(std::span<const double>(theta.data(), g.d1()),
                                std::span<const double>(theta.data() + g.d1(), g.d2()));
        return py::make_tuple(l[0], l[1]);
      },
      py::arg("game"), py::arg("theta"));

  m.def(
      "derivatives",
      [](const std::string& game, const Vec& theta) {
        const DerivativeBundle b = eval_bundle(game_by_name(game), theta);
        py::dict out;
        int p = 1;
        for (const LossDerivatives* l : {&b.loss1, &b.loss2}) {
          py::dict d;
          d["value"] = l->value;
          d["grad1"] = l->grad1;
          d["grad2"] = l->grad2;
          d["h11"] = l->h11;
          d["h12"] = l->h12;
          d["h21"] = l->h21;
          d["h22"] = l->h22;
          out[py::str("L" + std::to_string(p++))] = d;
        }
        return out;
      },
      py::arg("game"), py::arg("theta"));

  m.def(
      "run",
      [](const std::string& game, const std::string& rule, std::optional<std::string> opponent,
         std::optional<int> steps, std::optional<std::uint64_t> seed, const std::string& overrides) {
        ExperimentConfig cfg = make_config(game, rule, opponent, overrides);
        if (steps) cfg.steps = *steps;
        if (seed) cfg.seed = *seed;
        RunResult run;
        {
          py::gil_scoped_release release;
          run = run_experiment(cfg);
        }
        return run_to_dict(run);
      },
      py::arg("game"), py::arg("rule"), py::arg("opponent") = py::none(),
      py::arg("steps") = py::none(), py::arg("seed") = py::none(), py::arg("overrides") = "");

  m.def(
      "benchmark",
      [](std::optional<int> n_games, std::optional<int> steps, std::optional<std::uint64_t> seed,
         int threads) {
        BenchmarkOptions options = default_benchmark();
        if (n_games) options.n_games = *n_games;
        if (steps) options.steps = *steps;
        if (seed) options.seed = *seed;
        options.threads = threads;
        BenchmarkSummary summary;
        {
          py::gil_scoped_release release;
          summary = run_benchmark(options);
        }
        return summary_to_json(summary).dump();
      },
      py::arg("n_games") = py::none(), py::arg("steps") = py::none(), py::arg("seed") = py::none(),
      py::arg("threads") = 0);

  m.def(
      "enumerate_nash",
      [](const std::array<std::array<double, 2>, 2>& payoff1,
         const std::array<std::array<double, 2>, 2>& payoff2) {
        const NashSet set = enumerate_nash(BimatrixGame{payoff1, payoff2});
        py::list points;
        for (const NashPoint& pt : set.points) {
          py::dict d;
          d["p1"] = pt.p1;
          d["p2"] = pt.p2;
          d["kind"] = pt.kind == NashKind::kPure ? "pure" : "mixed";
          d["losses"] = py::make_tuple(pt.expected_losses[0], pt.expected_losses[1]);
          points.append(d);
        }
        return points;
      },
      py::arg("payoff1"), py::arg("payoff2"));

  m.def("verify", [] {
    std::vector<std::tuple<std::string, bool, std::string>> out;
    for (const CheckResult& c : run_property_suite()) out.emplace_back(c.name, c.passed, c.detail);
    return out;
  });
}
