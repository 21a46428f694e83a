#pragma once

// Online play under a sequentially revealed cost schedule: at step t the
// players know the costs up to stage t+W, pad the unknown tail with the
// last revealed matrices, re-solve the equilibrium from x̄₁, and track the
// predicted trajectory with a fixed stabilizing gain.

#include <optional>
#include <vector>

#include "lqpg/game.hpp"
#include "lqpg/linalg.hpp"

namespace lqpg {

struct PaddedSchedule {
  CostSchedule schedule;  // materialized Q_{τ+1|t}, R^i_{τ|t}
  int t = 0;
  int W = 0;
  /// Last stage whose true costs are known: min(t + W, T - 1).
  int last_known = 0;
};

/// Q_{τ+1|t} = Q_{τ+1} and R_{τ|t} = R_τ for τ <= t+W; beyond that the
/// stage-(t+W) values are repeated.
PaddedSchedule pad_schedule(const CostSchedule& costs, int t, int W);

/// Stabilizing joint gain from the identity-weighted infinite-horizon
/// Riccati fixed point, K̄ = -(I + 𝐁'P𝐁)⁻¹ 𝐁'P A. Throws NotStabilizable
/// unless ρ(A + 𝐁K̄) < 1 - spectral_margin.
Mat compute_tracking_gain(const GameSpec& spec, const Tolerances& tol = {});

/// Equilibrium of the padded game seen at step t, solved from x̄₁.
/// ThetaNotPD is re-raised with the online step as its stage.
NashSolution predict_nash(const GameSpec& spec, int t, int W,
                          const Tolerances& tol = {});

struct PouResult {
  double pou = 0.0;
  double nash_social_cost = 0.0;
};

/// pou = ½ Σ_i [J_i(run) - J_i(Nash)], nash_social_cost = ½ Σ_i J_i(Nash).
///
/// The difference is accumulated stage by stage as
///   ½ Σ_i Σ_t  δ_t' H_t^i δ_t + 2 δ_t' (H_t^i K_t + 𝐁'P^i_{t+1} A) x_t,
/// with δ_t = u_t - K_t x_t and H_t^i = R_t^i + 𝐁'P^i_{t+1}𝐁, which equals
/// the plain cost difference but does not lose the small gap to
/// cancellation. `states` must be the trajectory generated by `controls`.
PouResult compute_pou(const GameSpec& spec, const NashSolution& nash,
                      const std::vector<Vec>& states,
                      const std::vector<Vec>& controls);
PouResult compute_pou(const GameSpec& spec, const std::vector<Vec>& states,
                      const std::vector<Vec>& controls,
                      const Tolerances& tol = {});

/// log|pou / nash_social_cost|; nullopt when pou is exactly zero.
/// Throws ZeroNashCost when nash_social_cost == 0.
std::optional<double> log_rel_pou(double pou, double nash_social_cost);

struct OnlineRun {
  std::vector<Vec> x;                    // realized x_1 .. x_T
  std::vector<Vec> u;                    // realized u_1 .. u_{T-1}
  std::vector<std::vector<Vec>> x_pred;  // x_pred[t-1] = x_{·|t}
  std::vector<std::vector<Vec>> u_pred;  // u_pred[t-1] = u_{·|t}
  Mat K_tracking;
  double pou = 0.0;
  std::optional<double> log_rel_pou;
  double nash_social_cost = 0.0;
  Vec tracking_error;  // ‖x_t - x_{t|t}‖, t = 1 .. T-1
};

/// Runs prediction + tracking for t = 1 .. T-1 with preview W:
///   u_t = K̄ (x_t - x_{t|t}) + u_{t|t}.
/// When `full_info` is given it must be the equilibrium of `spec`; it is
/// used for the PoU instead of re-solving.
OnlineRun run_online(const GameSpec& spec, int W,
                     const std::optional<Mat>& k_tracking = std::nullopt,
                     const Tolerances& tol = {},
                     const NashSolution* full_info = nullptr);

struct GainGap {
  int t = 0;
  double gap = 0.0;  // ‖K_{t|t} - K_t‖₂
};

/// Per-step distance between the predicted stage-t gain and the
/// full-information stage-t gain.
std::vector<GainGap> gain_decay_diagnostic(const GameSpec& spec, int W,
                                           const Tolerances& tol = {});

}  // namespace lqpg
