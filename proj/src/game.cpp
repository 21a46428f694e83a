#include "lqpg/game.hpp"

#include <cmath>
#include <string>

#include "lqpg/error.hpp"

namespace lqpg {

namespace {

void check_shape(const Mat& m, int rows, int cols, const std::string& what) {
  if (static_cast<int>(m.rows()) != rows || static_cast<int>(m.cols()) != cols)
    throw Error(ErrorCode::DimensionMismatch,
                what + " must be " + std::to_string(rows) + "x" +
                    std::to_string(cols) + ", got " +
                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

void check_symmetric(const Mat& m, double tol, const std::string& what) {
  if (relative_gap(m, m.transpose()) > tol)
    throw Error(ErrorCode::InvalidConfig, what + " is not symmetric");
}

Vec step(const Mat& a, const Mat& bb, const Vec& x, const Vec& u) {
  return add(a * x, bb * u);
}

// x_{t+1}' Q_{t+1} x_{t+1} + u_t' R_t^i u_t
double stage_cost(const GameSpec& spec, Player i, int t, const Vec& x_next,
                  const Vec& u) {
  return quad_form(spec.costs.q(t + 1), x_next) +
         quad_form(spec.costs.r(i, t), u);
}

// Cost-to-go from x at stage `from` under the linear feedback `gains`.
double cost_to_go(const GameSpec& spec, const Mat& bb,
                  const std::vector<Mat>& gains, Player i, int from, Vec x) {
  double total = 0.0;
  for (int t = from; t <= spec.T - 1; ++t) {
    const Vec u = gains[t - 1] * x;
    x = step(spec.A, bb, x, u);
    total += stage_cost(spec, i, t, x, u);
  }
  return total;
}

void check_policies(const GameSpec& spec, const std::vector<Mat>& gains,
                    const char* what) {
  if (static_cast<int>(gains.size()) != spec.T - 1)
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " must hold T-1 gains");
  for (const Mat& k : gains) check_shape(k, 2 * spec.m, spec.n, what);
}

}  // namespace

CostSchedule::CostSchedule(std::vector<Mat> q, std::vector<Mat> r1,
                           std::vector<Mat> r2)
    : q_(std::move(q)), r1_(std::move(r1)), r2_(std::move(r2)) {
  if (r1_.size() != q_.size() || r2_.size() != q_.size())
    throw Error(ErrorCode::DimensionMismatch,
                "Q, R1 and R2 schedules must all have T-1 entries");
}

const Mat& CostSchedule::q(int t) const {
  if (t < 2 || t > horizon())
    throw Error(ErrorCode::IndexOutOfRange, "Q index " + std::to_string(t));
  return q_[t - 2];
}

const Mat& CostSchedule::r(Player i, int t) const {
  if (t < 1 || t > horizon() - 1)
    throw Error(ErrorCode::IndexOutOfRange, "R index " + std::to_string(t));
  return i == Player::One ? r1_[t - 1] : r2_[t - 1];
}

Mat GameSpec::joint_b() const { return hstack(B1, B2); }

void GameSpec::validate(const Tolerances& tol) const {
  if (n < 1 || m < 1)
    throw Error(ErrorCode::DimensionMismatch, "n and m must be positive");
  if (T < 2) throw Error(ErrorCode::DimensionMismatch, "T must be at least 2");
  check_shape(A, n, n, "A");
  check_shape(B1, n, m, "B1");
  check_shape(B2, n, m, "B2");
  if (static_cast<int>(x1.size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "x1 must have length n");
  if (costs.horizon() != T)
    throw Error(ErrorCode::DimensionMismatch,
                "cost schedule length does not match T-1");
  if (!A.all_finite() || !B1.all_finite() || !B2.all_finite())
    throw Error(ErrorCode::InvalidConfig, "system matrices must be finite");
  for (double v : x1)
    if (!std::isfinite(v))
      throw Error(ErrorCode::InvalidConfig, "x1 must be finite");
  for (int t = 2; t <= T; ++t) {
    const Mat& q = costs.q(t);
    const std::string name = "Q_" + std::to_string(t);
    check_shape(q, n, n, name);
    if (!q.all_finite()) throw Error(ErrorCode::InvalidConfig, name + " not finite");
    check_symmetric(q, tol.symmetry, name);
  }
  for (int t = 1; t <= T - 1; ++t) {
    for (Player i : {Player::One, Player::Two}) {
      const Mat& r = costs.r(i, t);
      const std::string name = "R" + std::to_string(static_cast<int>(i)) +
                               "_" + std::to_string(t);
      check_shape(r, 2 * m, 2 * m, name);
      if (!r.all_finite()) throw Error(ErrorCode::InvalidConfig, name + " not finite");
      check_symmetric(r, tol.symmetry, name);
    }
  }
}

GameSpec with_costs(const GameSpec& spec, CostSchedule costs) {
  if (costs.horizon() != spec.T)
    throw Error(ErrorCode::DimensionMismatch, "replacement schedule horizon");
  GameSpec out = spec;
  out.costs = std::move(costs);
  return out;
}

std::vector<Vec> simulate(const GameSpec& spec,
                          const std::vector<Vec>& controls) {
  if (static_cast<int>(controls.size()) != spec.T - 1)
    throw Error(ErrorCode::DimensionMismatch, "simulate needs T-1 controls");
  const Mat bb = spec.joint_b();
  std::vector<Vec> states;
  states.reserve(spec.T);
  states.push_back(spec.x1);
  for (const Vec& u : controls) {
    if (static_cast<int>(u.size()) != 2 * spec.m)
      throw Error(ErrorCode::DimensionMismatch, "control length must be 2m");
    states.push_back(step(spec.A, bb, states.back(), u));
  }
  return states;
}

Rollout rollout_feedback(const GameSpec& spec, const std::vector<Mat>& gains) {
  check_policies(spec, gains, "gains");
  const Mat bb = spec.joint_b();
  Rollout r;
  r.states.reserve(spec.T);
  r.controls.reserve(spec.T - 1);
  r.states.push_back(spec.x1);
  for (const Mat& k : gains) {
    r.controls.push_back(k * r.states.back());
    r.states.push_back(step(spec.A, bb, r.states.back(), r.controls.back()));
  }
  return r;
}

double evaluate_cost(const GameSpec& spec, Player i,
                     const std::vector<Vec>& states,
                     const std::vector<Vec>& controls) {
  if (static_cast<int>(states.size()) != spec.T ||
      static_cast<int>(controls.size()) != spec.T - 1)
    throw Error(ErrorCode::DimensionMismatch,
                "evaluate_cost needs T states and T-1 controls");
  double total = 0.0;
  for (int t = 1; t <= spec.T - 1; ++t) {
    const Vec& x_next = states[t];
    const Vec& u = controls[t - 1];
    if (static_cast<int>(x_next.size()) != spec.n ||
        static_cast<int>(u.size()) != 2 * spec.m)
      throw Error(ErrorCode::DimensionMismatch, "trajectory entry length");
    total += stage_cost(spec, i, t, x_next, u);
  }
  return total;
}

NashSolution solve_feedback_nash(const GameSpec& spec, const Tolerances& tol) {
  spec.validate(tol);
  const int T = spec.T;
  const auto m = static_cast<std::size_t>(spec.m);
  const Mat bb = spec.joint_b();
  const Mat& b1 = spec.B1;
  const Mat& b2 = spec.B2;
  const Mat b1t = b1.transpose();
  const Mat b2t = b2.transpose();

  NashSolution sol;
  sol.K.resize(T - 1);
  sol.theta.resize(T - 1);
  sol.theta_min_eig.resize(T - 1);
  sol.P1.resize(T - 1);
  sol.P2.resize(T - 1);

  Mat p1 = spec.costs.q(T);
  Mat p2 = p1;
  sol.P1[T - 2] = p1;
  sol.P2[T - 2] = p2;

  for (int t = T - 1; t >= 1; --t) {
    const Mat& r1 = spec.costs.r1(t);
    const Mat& r2 = spec.costs.r2(t);
    const Mat p1b1 = p1 * b1;
    const Mat p2b2 = p2 * b2;

    // [Θ_t]_ij = [R_t^i]_ij + B^i' P_{t+1}^i B^j
    Mat theta(2 * m, 2 * m);
    theta.set_block(0, 0, r1.block(0, 0, m, m) + b1t * p1b1);
    theta.set_block(0, m, r1.block(0, m, m, m) + b1t * (p1 * b2));
    theta.set_block(m, 0, r2.block(m, 0, m, m) + b2t * (p2 * b1));
    theta.set_block(m, m, r2.block(m, m, m, m) + b2t * p2b2);

    const CholeskyResult chol = cholesky_pd(theta, tol.pd_pivot);
    if (!chol.is_pd)
      throw Error(ErrorCode::ThetaNotPD,
                  "Theta min pivot " + std::to_string(chol.min_pivot), t);

    // Θ_t K_t = -[B^1' P^1_{t+1}; B^2' P^2_{t+1}] A
    const Mat rhs = vstack(p1b1.transpose() * spec.A, p2b2.transpose() * spec.A);
    Mat k = solve(theta, rhs) * -1.0;
    if (!k.all_finite())
      throw Error(ErrorCode::ThetaNotPD, "gain is not finite", t);

    sol.theta_min_eig[t - 1] = lambda_min(theta);
    sol.theta[t - 1] = std::move(theta);

    if (t >= 2) {
      const Mat closed = spec.A + bb * k;
      const Mat closed_t = closed.transpose();
      const Mat kt = k.transpose();
      const Mat& q = spec.costs.q(t);
      p1 = (q + kt * r1 * k + closed_t * p1 * closed).symmetrized();
      p2 = (q + kt * r2 * k + closed_t * p2 * closed).symmetrized();
      sol.P1[t - 2] = p1;
      sol.P2[t - 2] = p2;
    }
    sol.K[t - 1] = std::move(k);
  }

  Rollout r = rollout_feedback(spec, sol.K);
  sol.x_star = std::move(r.states);
  sol.u_star = std::move(r.controls);
  return sol;
}

DeviationCosts verify_nash_by_deviation(const GameSpec& spec,
                                        const NashSolution& nash, int stage,
                                        Player i, const Vec& deviation) {
  if (stage < 1 || stage > spec.T - 1)
    throw Error(ErrorCode::IndexOutOfRange,
                "deviation stage " + std::to_string(stage));
  if (static_cast<int>(deviation.size()) != spec.m)
    throw Error(ErrorCode::DimensionMismatch, "deviation must have length m");
  check_policies(spec, nash.K, "Nash gains");

  const Mat bb = spec.joint_b();
  const std::size_t offset = i == Player::One ? 0 : spec.m;

  auto play = [&](bool deviate) {
    std::vector<Vec> xs{spec.x1};
    std::vector<Vec> us;
    for (int t = 1; t <= spec.T - 1; ++t) {
      Vec u = nash.gain(t) * xs.back();
      if (deviate && t == stage)
        for (std::size_t k = 0; k < deviation.size(); ++k)
          u[offset + k] += deviation[k];
      xs.push_back(step(spec.A, bb, xs.back(), u));
      us.push_back(std::move(u));
    }
    return evaluate_cost(spec, i, xs, us);
  };

  return {play(false), play(true)};
}

CostDifference cost_difference_check(const GameSpec& spec,
                                     const std::vector<Mat>& policies_a,
                                     const std::vector<Mat>& policies_b,
                                     Player i) {
  check_policies(spec, policies_a, "policies_a");
  check_policies(spec, policies_b, "policies_b");
  const Mat bb = spec.joint_b();

  const Rollout a = rollout_feedback(spec, policies_a);
  const Rollout b = rollout_feedback(spec, policies_b);

  CostDifference out;
  out.lhs = evaluate_cost(spec, i, a.states, a.controls) -
            evaluate_cost(spec, i, b.states, b.controls);

  for (int t = 1; t <= spec.T - 1; ++t) {
    const Vec& x = a.states[t - 1];
    const Vec& u = a.controls[t - 1];
    const Vec x_next = step(spec.A, bb, x, u);
    const double q_value = stage_cost(spec, i, t, x_next, u) +
                           cost_to_go(spec, bb, policies_b, i, t + 1, x_next);
    const double v_value = cost_to_go(spec, bb, policies_b, i, t, x);
    out.rhs += q_value - v_value;
  }
  return out;
}

}  // namespace lqpg
