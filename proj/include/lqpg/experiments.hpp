#pragma once

// Monte Carlo sweeps over randomly drawn two-player "shared battery" games:
//   A = [[a, 0], [0, 0.9]],  B = [[-b1, -b2], [0, 0]],
//   Q_t = [[l_t, -d_t], [-d_t, 0]],  R^1_t = diag(r1_t, 0), R^2_t = diag(0, r2_t),
// with b1²/r1_t = b2²/r2_t = β_t.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lqpg/game.hpp"
#include "lqpg/linalg.hpp"
#include "lqpg/potential.hpp"

namespace lqpg {

struct Uniform {
  double low = 0.0;
  double high = 1.0;
};

enum class DConvention { Literal, Magnitude };
/// How r_i is derived from β: Beta uses b_i²/r_i = β, InverseBeta uses
/// b_i²/r_i = 1/β.
enum class CostRatio { Beta, InverseBeta };

struct ExperimentConfig {
  double a = 1.6;
  double b1 = 0.85;
  double b2 = 0.89;
  std::vector<int> T_range{20};
  std::vector<int> W_range{0, 1, 2, 3, 4, 5, 6};
  int runs = 100;
  std::uint64_t seed = 1;
  Uniform beta_dist{10.0, 110.0};
  Uniform l_dist{10.0, 110.0};
  Uniform d_dist{-110.0, -10.0};
  DConvention d_convention = DConvention::Literal;
  CheckMode assumption_mode = CheckMode::Warn;
  Vec x1{1.0, 1.0};
  /// Draw one stage and repeat it over the whole horizon.
  bool time_invariant = false;
  CostRatio cost_ratio = CostRatio::Beta;
  int threads = 1;

  /// Throws InvalidConfig.
  void validate() const;
};

/// Uniform in [0, 1) from (seed, t, tag); independent of draw order.
double counter_uniform(std::uint64_t seed, int t, std::uint32_t tag);

enum class DrawTag : std::uint32_t { Beta = 1, L = 2, D = 3 };

GameSpec generate_game(const ExperimentConfig& config, int T,
                       std::uint64_t seed);

struct SweepRow {
  int T = 0;
  int W = 0;
  std::uint64_t seed = 0;
  std::optional<double> pou;
  std::optional<double> nash_social_cost;
  std::optional<double> log_rel_pou;
  /// Empty for a successful cell, otherwise the failure message.
  std::string failure;
};

struct SweepAggregate {
  int T = 0;
  int W = 0;
  int cells = 0;  // successful rows averaged
  std::optional<double> mean_pou;
  std::optional<double> mean_nash_cost;
  std::optional<double> log_rel_pou;  // log|mean_pou / mean_nash_cost|
};

struct SweepResult {
  std::vector<SweepRow> rows;              // sorted by (T, W, seed)
  std::vector<SweepAggregate> aggregates;  // sorted by (T, W)
};

/// Runs every (T, W, run) cell; run r uses seed config.seed + r. A failing
/// cell is recorded with empty metrics and the sweep continues.
SweepResult sweep(const ExperimentConfig& config, const Tolerances& tol = {});

std::string rows_csv(const SweepResult& result);
std::string aggregates_csv(const SweepResult& result);

/// Writes `rows.csv` and `agg.csv` into `dir` (created if missing).
void emit_csv(const SweepResult& result, const std::filesystem::path& dir);

/// Parses the aggregate CSV format back. Throws ParseError.
std::vector<SweepAggregate> parse_aggregates_csv(const std::string& text);

enum class PlotAxis { T, W };

/// SVG line chart of log_rel_pou against the chosen axis, one series per
/// value of the other variable. Throws EmptyAggregate when nothing plots.
std::string render_plot(const std::vector<SweepAggregate>& aggregates,
                        PlotAxis x_axis);
void emit_plot(const std::vector<SweepAggregate>& aggregates, PlotAxis x_axis,
               const std::filesystem::path& path);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace lqpg
