#pragma once

// Two-player finite-horizon linear-quadratic feedback games.
//
// Stage conventions (all 1-based, matching the public accessors):
//   states     x_1 .. x_T
//   controls   u_1 .. u_{T-1}, joint u_t = [u_t^1; u_t^2] of length 2m
//   Q_t        t = 2 .. T, weighting x_t
//   R_t^i      t = 1 .. T-1, weighting u_t (2m x 2m, block structured)
//   K_t        t = 1 .. T-1, joint gain 2m x n, u_t = K_t x_t
//   P_t^i      t = 2 .. T, with P_T^i = Q_T
//
// Player i's cost is  J_i = sum_{t=1}^{T-1} x_{t+1}' Q_{t+1} x_{t+1}
//                                           + u_t' R_t^i u_t.

#include <vector>

#include "lqpg/linalg.hpp"

namespace lqpg {

enum class Player { One = 1, Two = 2 };

class CostSchedule {
 public:
  CostSchedule() = default;
  /// `q` holds Q_2..Q_T, `r1`/`r2` hold R_1..R_{T-1}; all three the same
  /// length T-1.
  CostSchedule(std::vector<Mat> q, std::vector<Mat> r1, std::vector<Mat> r2);

  /// T implied by the schedule length.
  int horizon() const noexcept { return static_cast<int>(q_.size()) + 1; }

  const Mat& q(int t) const;                // t in 2..T
  const Mat& r(Player i, int t) const;      // t in 1..T-1
  const Mat& r1(int t) const { return r(Player::One, t); }
  const Mat& r2(int t) const { return r(Player::Two, t); }

  const std::vector<Mat>& q_list() const noexcept { return q_; }
  const std::vector<Mat>& r1_list() const noexcept { return r1_; }
  const std::vector<Mat>& r2_list() const noexcept { return r2_; }

  friend bool operator==(const CostSchedule&, const CostSchedule&) = default;

 private:
  std::vector<Mat> q_;
  std::vector<Mat> r1_;
  std::vector<Mat> r2_;
};

struct GameSpec {
  int n = 0;  // state dimension
  int m = 0;  // per-player control dimension
  int T = 0;  // horizon
  Mat A;
  Mat B1;
  Mat B2;
  Vec x1;
  CostSchedule costs;

  /// The joint input matrix [B1 B2], n x 2m.
  Mat joint_b() const;
  /// Player i's input block B^i.
  const Mat& b(Player i) const { return i == Player::One ? B1 : B2; }

  /// Throws DimensionMismatch / InvalidConfig when shapes, lengths or
  /// finiteness are off, or when a Q or R is asymmetric beyond `tol`.
  void validate(const Tolerances& tol = {}) const;

  friend bool operator==(const GameSpec&, const GameSpec&) = default;
};

/// Same game with a different cost schedule (horizon must match).
GameSpec with_costs(const GameSpec& spec, CostSchedule costs);

struct NashSolution {
  std::vector<Mat> K;       // K_1 .. K_{T-1}
  std::vector<Mat> theta;   // Θ_1 .. Θ_{T-1}
  std::vector<Mat> P1;      // P_2^1 .. P_T^1
  std::vector<Mat> P2;      // P_2^2 .. P_T^2
  std::vector<Vec> x_star;  // x_1 .. x_T
  std::vector<Vec> u_star;  // u_1 .. u_{T-1}
  Vec theta_min_eig;        // λ_min(Θ_t), t = 1 .. T-1

  int horizon() const noexcept { return static_cast<int>(x_star.size()); }
  const Mat& gain(int t) const { return K.at(t - 1); }
  const Mat& theta_at(int t) const { return theta.at(t - 1); }
  const Mat& p(Player i, int t) const {
    return (i == Player::One ? P1 : P2).at(t - 2);
  }
  const Vec& state(int t) const { return x_star.at(t - 1); }
  const Vec& control(int t) const { return u_star.at(t - 1); }
};

/// x_1 = spec.x1, x_{t+1} = A x_t + 𝐁 u_t.
std::vector<Vec> simulate(const GameSpec& spec, const std::vector<Vec>& controls);

/// Rolls out the linear feedback u_t = K_t x_t from spec.x1.
struct Rollout {
  std::vector<Vec> states;
  std::vector<Vec> controls;
};
Rollout rollout_feedback(const GameSpec& spec, const std::vector<Mat>& gains);

double evaluate_cost(const GameSpec& spec, Player i,
                     const std::vector<Vec>& states,
                     const std::vector<Vec>& controls);

/// Coupled Riccati recursion for the unique feedback Nash equilibrium.
/// Throws ThetaNotPD(t) when Θ_t cannot be certified positive definite.
NashSolution solve_feedback_nash(const GameSpec& spec,
                                 const Tolerances& tol = {});

struct DeviationCosts {
  double cost_at_nash = 0.0;
  double cost_deviated = 0.0;
};

/// Player i's cost along the equilibrium versus a unilateral change of
/// their stage-t control by `deviation`, with both players returning to
/// their equilibrium feedback policies afterwards.
DeviationCosts verify_nash_by_deviation(const GameSpec& spec,
                                        const NashSolution& nash, int stage,
                                        Player i, const Vec& deviation);

struct CostDifference {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Both sides of the cost difference identity for linear feedback policies
/// a and b, evaluated by explicit rollouts:
///   J_i(a) - J_i(b) = sum_t [ Q^b_t(x_t, u_t) - V^b_t(x_t) ],
/// with (x_t, u_t) generated by a and Q^b, V^b the stage-action value and
/// cost-to-go under continuation b.
CostDifference cost_difference_check(const GameSpec& spec,
                                     const std::vector<Mat>& policies_a,
                                     const std::vector<Mat>& policies_b,
                                     Player i);

}  // namespace lqpg
