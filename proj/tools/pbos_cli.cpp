// Command-line front end: trajectories, cross-play, the random bimatrix
// benchmark, vector fields and the built-in invariant suite.
//
// Exit codes: 0 success, 1 configuration error, 2 run divergence,
// 3 failed verification.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pbos/errors.hpp"
#include "pbos/harness.hpp"
#include "pbos/json_io.hpp"
#include "pbos/svg.hpp"
#include "pbos/verify.hpp"

namespace fs = std::filesystem;
using namespace pbos;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDiverged = 2;
constexpr int kExitVerify = 3;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
};

fs::path output_dir(const CommonOptions& common) {
  fs::path dir = common.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("PBOS_OUT_DIR");
    dir = env != nullptr && *env != '\0' ? fs::path(env) : fs::path("pbos_out");
  }
  fs::create_directories(dir);
  return dir;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

void write_trajectory(const fs::path& stem, const RunResult& run, const std::string& format,
                      const std::string& title) {
  {
    std::ofstream csv(stem.string() + ".csv");
    write_records_csv(csv, run.records);
  }
  if (format != "csv+svg") return;
  PlotSeries l1{"L1", {}, {}};
  PlotSeries l2{"L2", {}, {}};
  PlotSeries c1{"c1", {}, {}};
  PlotSeries c2{"c2", {}, {}};
  for (const RunRecord& r : run.records) {
    const double t = static_cast<double>(r.step);
    l1.x.push_back(t);
    l1.y.push_back(r.L1);
    l2.x.push_back(t);
    l2.y.push_back(r.L2);
    c1.x.push_back(t);
    c1.y.push_back(r.c1);
    c2.x.push_back(t);
    c2.y.push_back(r.c2);
  }
  {
    std::ofstream svg(stem.string() + "_loss.svg");
    write_line_plot(svg, title + " losses", "step", {l1, l2});
  }
  std::ofstream svg(stem.string() + "_c.svg");
  write_line_plot(svg, title + " preferences", "step", {c1, c2});
}

void print_summary(const std::string& label, const RunResult& run) {
  const auto f = run.final_losses();
  const auto& pref = run.final_state.pref;
  std::cout << label << " final L1=" << fmt(f[0]) << " L2=" << fmt(f[1])
            << " c1=" << fmt(pref.c1) << " c2=" << fmt(pref.c2)
            << " steps=" << run.final_state.step << " diverged=" << (run.diverged ? 1 : 0);
  if (!run.error.empty()) std::cout << " error=\"" << run.error << '"';
  std::cout << '\n';
}

std::vector<double> parse_reals(const std::string& text, std::size_t expected,
                                const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ConfigError(what + ": '" + cell + "' is not a number");
    }
  }
  if (out.size() != expected) {
    throw ConfigError(what + " needs " + std::to_string(expected) + " comma-separated values");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Opponent shaping with learned preferences in two-player differentiable games"};
  app.require_subcommand(1);
  CommonOptions common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON experiment config overlaying defaults");
    sub->add_option("--out", common.out_dir, "Output directory (default $PBOS_OUT_DIR or ./pbos_out)");
    sub->add_option("--seed", common.seed, "Seed override");
    sub->add_option("--format", common.format, "Output format")
        ->check(CLI::IsMember({"csv", "csv+svg"}));
  };

  std::string game = "tandem";
  std::string rule = "pbos";
  std::string opponent = "all";
  std::optional<int> steps;
  std::optional<int> record_every;
  std::optional<std::string> prefs;

  auto* run = app.add_subcommand("run", "Self-play trajectory of one rule on one game");
  add_common(run);
  run->add_option("--game", game, "Game name")->check(CLI::IsMember(game_names()));
  run->add_option("--rule", rule, "Update rule")
      ->check(CLI::IsMember({"naive", "lola", "sos", "cgd", "cpbos", "pbos"}));
  run->add_option("--steps", steps, "Number of updates");
  run->add_option("--record-every", record_every, "Record every k-th step");
  run->add_option("--c", prefs, "Initial (or fixed, for cpbos) preferences c1,c2");

  auto* cross = app.add_subcommand("crossplay", "PBOS (player 1) against baseline rules");
  add_common(cross);
  cross->add_option("--game", game, "Game name")->check(CLI::IsMember(crossplay_games()));
  cross->add_option("--opponent", opponent, "Opponent rule or 'all'")
      ->check(CLI::IsMember({"all", "lola", "sos", "cgd"}));
  cross->add_option("--steps", steps, "Number of updates");

  int n_games = 0;
  std::optional<int> threads;
  auto* bench = app.add_subcommand("benchmark", "Random 2x2 bimatrix benchmark");
  add_common(bench);
  bench->add_option("--n", n_games, "Number of random games");
  bench->add_option("--steps", steps, "Training steps per game and rule");
  bench->add_option("--threads", threads, "Worker threads (default: all cores)");

  std::string grid = "-2,2,-2,2,21,21";
  auto* field = app.add_subcommand("field", "One-step update directions over a parameter grid");
  add_common(field);
  field->add_option("--game", game, "Game name")->check(CLI::IsMember(game_names()));
  field->add_option("--rule", rule, "Update rule")
      ->check(CLI::IsMember({"naive", "lola", "sos", "cgd", "cpbos", "pbos"}));
  field->add_option("--grid", grid, "x_min,x_max,y_min,y_max,nx,ny");
  field->add_option("--c", prefs, "Preferences c1,c2 for cpbos/pbos");

  auto* verify = app.add_subcommand("verify", "Run the built-in invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) {
      std::cerr << "error: " << e.what() << "\n" << app.help();
      return kExitConfig;
    }
    return app.exit(e);
  }

  try {
    if (*run) {
      const Rule r = rule_from_string(rule);
      ExperimentConfig cfg = default_experiment(game, r);
      if (!common.config_path.empty()) merge_experiment(read_json_file(common.config_path), cfg);
      if (steps) cfg.steps = *steps;
      if (record_every) cfg.record_every = *record_every;
      if (common.seed) cfg.seed = *common.seed;
      if (prefs) {
        const auto c = parse_reals(*prefs, 2, "--c");
        cfg.learner.c_init = {c[0], c[1]};
      }
      const RunResult result = run_selfplay(cfg);
      const fs::path stem = output_dir(common) / (cfg.game + "_" + to_string(cfg.rule) + "_s" +
                                                  std::to_string(cfg.seed));
      write_trajectory(stem, result, common.format, cfg.game + " " + to_string(cfg.rule));
      print_summary(cfg.game + " " + to_string(cfg.rule), result);
      std::cout << "wrote " << stem.string() << ".csv\n";
      return result.diverged ? kExitDiverged : kExitOk;
    }

    if (*cross) {
      std::vector<Rule> opponents = crossplay_baselines();
      if (opponent != "all") opponents = {rule_from_string(opponent)};
      bool any_diverged = false;
      for (Rule opp : opponents) {
        ExperimentConfig cfg = default_crossplay(game, opp);
        if (!common.config_path.empty()) merge_experiment(read_json_file(common.config_path), cfg);
        if (steps) cfg.steps = *steps;
        if (common.seed) cfg.seed = *common.seed;
        const RunResult result = run_experiment(cfg);
        const std::string label = game + " pbos_vs_" + to_string(opp);
        const fs::path stem = output_dir(common) /
                              (game + "_pbos_vs_" + to_string(opp) + "_s" + std::to_string(cfg.seed));
        write_trajectory(stem, result, common.format, label);
        print_summary(label, result);
        any_diverged = any_diverged || result.diverged;
      }
      return any_diverged ? kExitDiverged : kExitOk;
    }

    if (*bench) {
      BenchmarkOptions options = default_benchmark();
      if (!common.config_path.empty()) {
        const auto j = read_json_file(common.config_path);
        if (j.contains("learner")) merge_learner(j["learner"], options.learner);
        if (j.contains("steps")) options.steps = j["steps"].get<int>();
        if (j.contains("n_games")) options.n_games = j["n_games"].get<int>();
        if (j.contains("seed")) options.seed = j["seed"].get<std::uint64_t>();
      }
      if (n_games > 0) options.n_games = n_games;
      if (steps) options.steps = *steps;
      if (threads) options.threads = *threads;
      if (common.seed) options.seed = *common.seed;
      const BenchmarkSummary summary = run_benchmark(options);
      const nlohmann::json j = summary_to_json(summary);
      const fs::path path = output_dir(common) / ("benchmark_n" + std::to_string(options.n_games) +
                                                  "_s" + std::to_string(options.seed) + ".json");
      std::ofstream(path) << j.dump(2) << '\n';
      std::cout << j.dump(2) << '\n';
      return kExitOk;
    }

    if (*field) {
      const Rule r = rule_from_string(rule);
      ExperimentConfig cfg = default_experiment(game, r);
      if (!common.config_path.empty()) merge_experiment(read_json_file(common.config_path), cfg);
      if (prefs) {
        const auto c = parse_reals(*prefs, 2, "--c");
        cfg.learner.c_init = {c[0], c[1]};
      }
      const auto g = parse_reals(grid, 6, "--grid");
      GridSpec spec{g[0], g[1], g[2], g[3], static_cast<int>(g[4]), static_cast<int>(g[5])};
      const auto samples = emit_vector_field(cfg.make_game(), r, spec, cfg.learner);
      const fs::path path = output_dir(common) / (game + "_" + rule + "_field.csv");
      std::ofstream out(path);
      write_field_csv(out, samples);
      std::cout << "wrote " << path.string() << " (" << samples.size() << " samples)\n";
      return kExitOk;
    }

    if (*verify) {
      bool all = true;
      for (const CheckResult& check : run_property_suite()) {
        std::cout << (check.passed ? "PASS " : "FAIL ") << check.name;
        if (!check.detail.empty()) std::cout << " (" << check.detail << ")";
        std::cout << '\n';
        all = all && check.passed;
      }
      return all ? kExitOk : kExitVerify;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDiverged;
  }
  return kExitOk;
}
