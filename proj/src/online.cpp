#include "lqpg/online.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lqpg/error.hpp"

namespace lqpg {

PaddedSchedule pad_schedule(const CostSchedule& costs, int t, int W) {
  const int T = costs.horizon();
  if (t < 1 || t > T - 1)
    throw Error(ErrorCode::IndexOutOfRange,
                "online step " + std::to_string(t) + " outside 1.." +
                    std::to_string(T - 1));
  if (W < 0)
    throw Error(ErrorCode::IndexOutOfRange, "preview must be non-negative");

  const int last = std::min(t + W, T - 1);
  std::vector<Mat> q, r1, r2;
  q.reserve(T - 1);
  r1.reserve(T - 1);
  r2.reserve(T - 1);
  for (int tau = 1; tau <= T - 1; ++tau) {
    const int known = std::min(tau, last);
    q.push_back(costs.q(known + 1));
    r1.push_back(costs.r1(known));
    r2.push_back(costs.r2(known));
  }
  return {CostSchedule(std::move(q), std::move(r1), std::move(r2)), t, W, last};
}

Mat compute_tracking_gain(const GameSpec& spec, const Tolerances& tol) {
  const Mat bb = spec.joint_b();
  const Mat bbt = bb.transpose();
  const std::size_t n = spec.A.rows();
  const std::size_t controls = bb.cols();
  const Mat q = Mat::identity(n);
  const Mat r = Mat::identity(controls);

  auto gain_for = [&](const Mat& p) {
    return solve(r + bbt * p * bb, bbt * p * spec.A) * -1.0;
  };

  constexpr int kMaxIterations = 10000;
  Mat p = Mat::identity(n);
  bool converged = false;
  for (int k = 0; k < kMaxIterations; ++k) {
    const Mat gain = gain_for(p);
    const Mat closed = spec.A + bb * gain;
    Mat next = (q + gain.transpose() * r * gain +
                closed.transpose() * p * closed).symmetrized();
    if (!next.all_finite())
      throw Error(ErrorCode::NotStabilizable, "Riccati iterate diverged");
    const double change = (next - p).max_abs() / std::max(1.0, next.max_abs());
    p = std::move(next);
    if (change < 1e-10) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw Error(ErrorCode::NotStabilizable,
                "Riccati iteration did not converge in " +
                    std::to_string(kMaxIterations) + " steps");

  Mat gain = gain_for(p);
  const double rho = spectral_radius_est(spec.A + bb * gain);
  if (!(rho < 1.0 - tol.spectral_margin))
    throw Error(ErrorCode::NotStabilizable,
                "closed-loop spectral radius " + std::to_string(rho));
  return gain;
}

NashSolution predict_nash(const GameSpec& spec, int t, int W,
                          const Tolerances& tol) {
  PaddedSchedule padded = pad_schedule(spec.costs, t, W);
  try {
    return solve_feedback_nash(with_costs(spec, std::move(padded.schedule)),
                               tol);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ThetaNotPD) throw;
    throw Error(ErrorCode::ThetaNotPD,
                "padded game at step " + std::to_string(t) + ": " + e.what(),
                t);
  }
}

PouResult compute_pou(const GameSpec& spec, const NashSolution& nash,
                      const std::vector<Vec>& states,
                      const std::vector<Vec>& controls) {
  const int T = spec.T;
  if (static_cast<int>(states.size()) != T ||
      static_cast<int>(controls.size()) != T - 1)
    throw Error(ErrorCode::DimensionMismatch,
                "PoU needs T states and T-1 controls");

  const Mat bb = spec.joint_b();
  const Mat bbt = bb.transpose();

  // The stage decomposition is exact only along a genuine trajectory.
  auto scale = [](const Vec& v) {
    double s = 1.0;
    for (double e : v) s = std::max(s, std::abs(e));
    return s;
  };
  if (norm(sub(states.front(), spec.x1)) > 1e-9 * scale(spec.x1))
    throw Error(ErrorCode::InconsistentTrajectory, "x_1 differs from x̄₁", 1);
  for (int t = 1; t <= T - 1; ++t) {
    const Vec predicted = add(spec.A * states[t - 1], bb * controls[t - 1]);
    if (norm(sub(predicted, states[t])) > 1e-9 * scale(predicted))
      throw Error(ErrorCode::InconsistentTrajectory,
                  "states do not follow the dynamics", t + 1);
  }

  PouResult out;
  for (Player i : {Player::One, Player::Two}) {
    out.nash_social_cost +=
        0.5 * evaluate_cost(spec, i, nash.x_star, nash.u_star);
  }

  for (int t = 1; t <= T - 1; ++t) {
    const Vec& x = states[t - 1];
    const Vec delta = sub(controls[t - 1], nash.gain(t) * x);
    for (Player i : {Player::One, Player::Two}) {
      const Mat& p_next = nash.p(i, t + 1);
      const Mat bp = bbt * p_next;
      const Mat h = spec.costs.r(i, t) + bp * bb;
      const Mat first_order = h * nash.gain(t) + bp * spec.A;
      out.pou += 0.5 * (quad_form(h, delta) + 2.0 * dot(delta, first_order * x));
    }
  }
  return out;
}

PouResult compute_pou(const GameSpec& spec, const std::vector<Vec>& states,
                      const std::vector<Vec>& controls, const Tolerances& tol) {
  return compute_pou(spec, solve_feedback_nash(spec, tol), states, controls);
}

std::optional<double> log_rel_pou(double pou, double nash_social_cost) {
  if (nash_social_cost == 0.0)
    throw Error(ErrorCode::ZeroNashCost, "Nash social cost is zero");
  if (pou == 0.0) return std::nullopt;
  return std::log(std::abs(pou / nash_social_cost));
}

OnlineRun run_online(const GameSpec& spec, int W,
                     const std::optional<Mat>& k_tracking,
                     const Tolerances& tol, const NashSolution* full_info) {
  spec.validate(tol);
  if (W < 0)
    throw Error(ErrorCode::IndexOutOfRange, "preview must be non-negative");
  const int T = spec.T;
  const Mat bb = spec.joint_b();

  OnlineRun run;
  run.K_tracking = k_tracking ? *k_tracking : compute_tracking_gain(spec, tol);
  if (static_cast<int>(run.K_tracking.rows()) != 2 * spec.m ||
      static_cast<int>(run.K_tracking.cols()) != spec.n)
    throw Error(ErrorCode::DimensionMismatch, "tracking gain must be 2m x n");

  run.x.reserve(T);
  run.u.reserve(T - 1);
  run.x_pred.reserve(T - 1);
  run.u_pred.reserve(T - 1);
  run.tracking_error.reserve(T - 1);
  run.x.push_back(spec.x1);

  // The padded schedule only depends on min(t + W, T - 1), so consecutive
  // steps past the end of the horizon share one prediction.
  int cached_last = -1;
  NashSolution prediction;
  for (int t = 1; t <= T - 1; ++t) {
    const int last = std::min(t + W, T - 1);
    if (last != cached_last) {
      prediction = predict_nash(spec, t, W, tol);
      cached_last = last;
    }
    const Vec& x = run.x.back();
    const Vec& x_pred = prediction.state(t);
    const Vec& u_pred = prediction.control(t);
    const Vec error = sub(x, x_pred);
    Vec u = add(run.K_tracking * error, u_pred);
    run.tracking_error.push_back(norm(error));
    run.x.push_back(add(spec.A * x, bb * u));
    run.u.push_back(std::move(u));
    run.x_pred.push_back(prediction.x_star);
    run.u_pred.push_back(prediction.u_star);
  }

  const PouResult pou =
      full_info ? compute_pou(spec, *full_info, run.x, run.u)
                : compute_pou(spec, run.x, run.u, tol);
  run.pou = pou.pou;
  run.nash_social_cost = pou.nash_social_cost;
  // A zero-cost equilibrium (x̄₁ = 0) has no relative PoU.
  if (pou.nash_social_cost != 0.0)
    run.log_rel_pou = log_rel_pou(pou.pou, pou.nash_social_cost);
  return run;
}

std::vector<GainGap> gain_decay_diagnostic(const GameSpec& spec, int W,
                                           const Tolerances& tol) {
  const NashSolution full = solve_feedback_nash(spec, tol);
  std::vector<GainGap> out;
  out.reserve(spec.T - 1);
  for (int t = 1; t <= spec.T - 1; ++t) {
    const NashSolution predicted = predict_nash(spec, t, W, tol);
    out.push_back({t, norm2(predicted.gain(t) - full.gain(t))});
  }
  return out;
}

}  // namespace lqpg
