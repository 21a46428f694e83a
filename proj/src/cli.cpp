#include "lqpg/cli.hpp"

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lqpg/error.hpp"
#include "lqpg/experiments.hpp"
#include "lqpg/io.hpp"
#include "lqpg/online.hpp"
#include "lqpg/potential.hpp"

namespace lqpg {

namespace {

constexpr int kUsage = 1;
constexpr int kStrictFailure = 2;
constexpr int kNumerical = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::AssumptionViolated:
      return kStrictFailure;
    case ErrorCode::ThetaNotPD:
    case ErrorCode::NotStabilizable:
    case ErrorCode::NoConvergence:
    case ErrorCode::Overflow:
    case ErrorCode::Singular:
    case ErrorCode::ReductionMismatch:
    case ErrorCode::ZeroNashCost:
    case ErrorCode::InconsistentTrajectory:
      return kNumerical;
    default:
      return kUsage;
  }
}

int report(const Error& e) {
  Json j{{"code", std::string(to_string(e.code()))},
         {"stage", e.stage() ? Json(*e.stage()) : Json(nullptr)},
         {"detail", e.detail()}};
  std::cerr << j.dump() << "\n";
  return exit_code_for(e.code());
}

Tolerances load_tolerances(const std::string& arg) {
  if (arg.empty()) return {};
  const auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && arg[first] == '{') {
    try {
      return tolerances_from_json(Json::parse(arg));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("--tol: ") + e.what());
    }
  }
  return tolerances_from_json(read_json_file(arg));
}

void emit(const Json& j, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << j.dump(2) << "\n";
  else
    write_json_file(out, j);
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Potential LQ games: equilibria, online play with preview, sweeps"};
  app.require_subcommand(1);

  std::string tol_arg;
  app.add_option("--tol", tol_arg, "Tolerance overrides: inline JSON or a JSON file");

  std::string spec_path, out_path, gain_path, config_path, out_dir, in_path, axis;
  bool strict = false;
  int preview = 0;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs, threads;

  auto* validate = app.add_subcommand("validate", "Check assumptions A1..A6");
  validate->add_option("--spec", spec_path, "GameSpec JSON")->required();
  validate->add_flag("--strict", strict, "Exit 2 when any assumption fails");

  auto* solve = app.add_subcommand("solve", "Solve the feedback Nash equilibrium");
  solve->add_option("--spec", spec_path, "GameSpec JSON")->required();
  solve->add_option("--out", out_path, "Output JSON (default stdout)");

  auto* run = app.add_subcommand("run", "Online play with a preview window");
  run->add_option("--spec", spec_path, "GameSpec JSON")->required();
  run->add_option("--preview", preview, "Preview window W")->required()->check(
      CLI::NonNegativeNumber);
  run->add_option("--gain", gain_path, "Tracking gain JSON matrix (2m x n)");
  run->add_option("--out", out_path, "Output JSON (default stdout)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo sweep to CSV");
  sweep_cmd->add_option("--config", config_path, "ExperimentConfig JSON")->required();
  sweep_cmd->add_option("--out-dir", out_dir, "Directory for rows.csv and agg.csv")
      ->required();
  sweep_cmd->add_option("--seed", seed, "Override config seed");
  sweep_cmd->add_option("--runs", runs, "Override runs per cell");
  sweep_cmd->add_option("--threads", threads, "Override worker threads");

  auto* plot = app.add_subcommand("plot", "Render an aggregate CSV as SVG");
  plot->add_option("--in", in_path, "Aggregate CSV")->required();
  plot->add_option("--x", axis, "Horizontal axis")
      ->required()
      ->check(CLI::IsMember({"T", "W"}));
  plot->add_option("--out", out_path, "Output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    const Tolerances tol = load_tolerances(tol_arg);

    if (*validate) {
      const GameSpec spec = spec_from_json(read_json_file(spec_path));
      const AssumptionReport rep = check_assumptions(spec, CheckMode::Warn, tol);
      std::cout << to_json(rep).dump(2) << "\n";
      if (strict && !rep.overall) {
        for (const auto& e : rep.entries)
          if (!e.passed)
            return report(Error(ErrorCode::AssumptionViolated, e.id + ": " + e.detail));
      }
      return 0;
    }
    if (*solve) {
      const GameSpec spec = spec_from_json(read_json_file(spec_path));
      emit(to_json(solve_feedback_nash(spec, tol)), out_path);
      return 0;
    }
    if (*run) {
      const GameSpec spec = spec_from_json(read_json_file(spec_path));
      std::optional<Mat> gain;
      if (!gain_path.empty()) gain = mat_from_json(read_json_file(gain_path));
      emit(to_json(run_online(spec, preview, gain, tol)), out_path);
      return 0;
    }
    if (*sweep_cmd) {
      ExperimentConfig config = config_from_json(read_json_file(config_path));
      if (seed) config.seed = *seed;
      if (runs) config.runs = *runs;
      if (threads) config.threads = *threads;
      config.validate();
      emit_csv(sweep(config, tol), out_dir);
      return 0;
    }
    if (*plot) {
      const auto aggregates = parse_aggregates_csv(read_text_file(in_path));
      emit_plot(aggregates, axis == "T" ? PlotAxis::T : PlotAxis::W, out_path);
      return 0;
    }
  } catch (const Error& e) {
    return report(e);
  }
  return kUsage;
}

}  // namespace lqpg
