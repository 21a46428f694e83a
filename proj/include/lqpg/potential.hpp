#pragma once

// Potential-game structure: assumption checks with margins, and the
// reduction of a potential LQ game to a single LQ optimal control problem
// whose Riccati recursion reproduces the equilibrium gains.

#include <array>
#include <string>
#include <vector>

#include "lqpg/game.hpp"
#include "lqpg/linalg.hpp"

namespace lqpg {

enum class CheckMode { Strict, Warn };

struct AssumptionEntry {
  std::string id;  // "A1" .. "A6"
  bool passed = false;
  /// Signed distance to violation, positive when passed.
  double margin = 0.0;
  std::string detail;
};

struct AssumptionReport {
  std::array<AssumptionEntry, 6> entries;
  bool overall = false;
  // Observed eigenvalue extremes across stages (reported, not asserted).
  double q_eig_min = 0.0;
  double q_eig_max = 0.0;
  double r_eig_min = 0.0;
  double r_eig_max = 0.0;

  const AssumptionEntry& entry(const std::string& id) const;
};

/// [[R1]_11, [R1]_12; [R2]_21, [R2]_22].
Mat build_r_potential(const Mat& r1, const Mat& r2);

/// Evaluates assumptions A1..A6. In Strict mode a failing report raises
/// AssumptionViolated naming the first failed id; Warn mode always returns.
AssumptionReport check_assumptions(const GameSpec& spec,
                                   CheckMode mode = CheckMode::Strict,
                                   const Tolerances& tol = {});

struct OcpReduction {
  std::vector<Mat> R_bar;      // t = 1 .. T-1
  std::vector<Mat> Q_bar;      // t = 2 .. T
  std::vector<Mat> P_bar;      // t = 2 .. T
  std::vector<Mat> K_bar_ocp;  // t = 1 .. T-1
  /// K_1' (R_1^1 - R̄_1) K_1: the stage-1 potential state-cost correction,
  /// which no gain consumes.
  Mat q_bar_stage1_correction;
  /// max_t relative gap between R^p_t and Θ_t - 𝐁'P̄_{t+1}𝐁.
  double r_bar_shortcut_gap = 0.0;
};

/// Builds the equivalent LQ optimal control problem (R̄ = R^p, Q̄ from the
/// equilibrium gains, terminal Q̄_T = Q_T) and solves its Riccati recursion.
OcpReduction reduce_to_ocp(const GameSpec& spec, const Tolerances& tol = {});

/// max_t ‖K_t(game) - K̄_t(ocp)‖₂.
double verify_equivalence(const GameSpec& spec, const Tolerances& tol = {});

struct StructureCheck {
  bool ratio_ok = false;
  double max_p_gap = 0.0;
};

/// For scalar-per-player games whose input acts only on the first state
/// and whose control costs are the single entries r_1,t and r_2,t: checks
/// b1²/r1,t = b2²/r2,t at every stage and reports max_t ‖P_t^1 - P_t^2‖₂.
StructureCheck check_sufficient_structure(const GameSpec& spec,
                                          const Tolerances& tol = {});

}  // namespace lqpg
