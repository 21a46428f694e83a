#include "lqpg/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lqpg/error.hpp"
#include "lqpg/online.hpp"

namespace lqpg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Equality residual of two matrices relative to the magnitude of `scale`.
double scaled_gap(const Mat& a, const Mat& b, const Mat& scale) {
  return (a - b).max_abs() / std::max(1.0, scale.max_abs());
}

// Conditions that make the game potential: Q_t PD, Θ_t PD, and the
// coupling equalities between the players' Riccati terms.
AssumptionEntry evaluate_a1(const GameSpec& spec, const Tolerances& tol) {
  AssumptionEntry e{"A1", false, 0.0, {}};
  double q_min = kInf;
  for (int t = 2; t <= spec.T; ++t) q_min = std::min(q_min, lambda_min(spec.costs.q(t)));

  NashSolution nash;
  try {
    nash = solve_feedback_nash(spec, tol);
  } catch (const Error& err) {
    if (err.code() != ErrorCode::ThetaNotPD) throw;
    e.margin = std::min(0.0, q_min);
    e.detail = err.what();
    return e;
  }
  double theta_min = kInf;
  for (double v : nash.theta_min_eig) theta_min = std::min(theta_min, v);

  const Mat bb = spec.joint_b();
  const Mat bbt = bb.transpose();
  double coupling = 0.0;  // Θ off-diagonal blocks transpose to each other
  for (int t = 1; t <= spec.T - 1; ++t) {
    const Mat& th = nash.theta_at(t);
    coupling = std::max(coupling, scaled_gap(th, th.transpose(), th));
  }
  double value_match = 0.0;  // 𝐁'P¹_t A = 𝐁'P²_t A
  for (int t = 2; t <= spec.T; ++t) {
    const Mat l = bbt * nash.p(Player::One, t) * spec.A;
    const Mat r = bbt * nash.p(Player::Two, t) * spec.A;
    value_match = std::max(value_match, scaled_gap(l, r, l));
  }

  const bool eq_ok = coupling <= tol.equality && value_match <= tol.equality;
  const double eig_margin = std::min(q_min, theta_min) - tol.pd_pivot;
  e.passed = eq_ok && eig_margin > 0.0;
  e.margin = eq_ok ? eig_margin
                   : std::min(tol.equality - coupling, tol.equality - value_match);
  e.detail = "min eig Q=" + fmt(q_min) + ", min eig Theta=" + fmt(theta_min) +
             ", coupling residual=" + fmt(coupling) +
             ", value residual=" + fmt(value_match);
  return e;
}

}  // namespace

const AssumptionEntry& AssumptionReport::entry(const std::string& id) const {
  for (const auto& e : entries)
    if (e.id == id) return e;
  throw Error(ErrorCode::IndexOutOfRange, "no assumption " + id);
}

Mat build_r_potential(const Mat& r1, const Mat& r2) {
  if (!r1.square() || r1.rows() != r2.rows() || r1.cols() != r2.cols() ||
      r1.rows() % 2 != 0)
    throw Error(ErrorCode::DimensionMismatch,
                "R^p needs two 2m x 2m control-cost matrices");
  const std::size_t m = r1.rows() / 2;
  Mat rp(2 * m, 2 * m);
  rp.set_block(0, 0, r1.block(0, 0, m, m));
  rp.set_block(0, m, r1.block(0, m, m, m));
  rp.set_block(m, 0, r2.block(m, 0, m, m));
  rp.set_block(m, m, r2.block(m, m, m, m));
  return rp;
}

AssumptionReport check_assumptions(const GameSpec& spec, CheckMode mode,
                                   const Tolerances& tol) {
  spec.validate(tol);
  AssumptionReport rep;
  const int T = spec.T;
  const Mat bb = spec.joint_b();

  rep.entries[0] = evaluate_a1(spec, tol);

  // A2: Q PD, R PSD; extremes reported.
  {
    rep.q_eig_min = kInf;
    rep.q_eig_max = -kInf;
    rep.r_eig_min = kInf;
    rep.r_eig_max = -kInf;
    for (int t = 2; t <= T; ++t) {
      const Vec e = sym_eig(spec.costs.q(t));
      rep.q_eig_min = std::min(rep.q_eig_min, e.front());
      rep.q_eig_max = std::max(rep.q_eig_max, e.back());
    }
    for (int t = 1; t <= T - 1; ++t)
      for (Player i : {Player::One, Player::Two}) {
        const Vec e = sym_eig(spec.costs.r(i, t));
        rep.r_eig_min = std::min(rep.r_eig_min, e.front());
        rep.r_eig_max = std::max(rep.r_eig_max, e.back());
      }
    const double q_margin = rep.q_eig_min - tol.pd_pivot;
    const double r_margin = rep.r_eig_min + tol.pd_pivot;
    auto& e = rep.entries[1];
    e.id = "A2";
    e.passed = q_margin > 0.0 && r_margin >= 0.0;
    e.margin = std::min(q_margin, r_margin);
    e.detail = "Q eig range [" + fmt(rep.q_eig_min) + ", " +
               fmt(rep.q_eig_max) + "], R eig range [" + fmt(rep.r_eig_min) +
               ", " + fmt(rep.r_eig_max) + "]";
  }

  // A3: A full rank and (A, 𝐁) stabilizable by the tracking gain.
  {
    auto& e = rep.entries[2];
    e.id = "A3";
    const double sigma_min_a =
        std::sqrt(std::max(0.0, lambda_min(spec.A.transpose() * spec.A)));
    const double rank_margin = sigma_min_a - tol.singular_value;
    try {
      const Mat k = compute_tracking_gain(spec, tol);
      const double rho = spectral_radius_est(spec.A + bb * k);
      const double stab_margin = 1.0 - tol.spectral_margin - rho;
      e.passed = rank_margin > 0.0 && stab_margin > 0.0;
      e.margin = std::min(rank_margin, stab_margin);
      e.detail = "sigma_min(A)=" + fmt(sigma_min_a) +
                 ", rho(A+BK)=" + fmt(rho);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::NotStabilizable &&
          err.code() != ErrorCode::Singular && err.code() != ErrorCode::Overflow)
        throw;
      e.passed = false;
      e.margin = std::min(0.0, rank_margin);
      e.detail = err.what();
    }
  }

  // A4: R^p_t PD (and symmetric).
  {
    auto& e = rep.entries[3];
    e.id = "A4";
    double min_eig = kInf;
    double asym = 0.0;
    bool pd = true;
    for (int t = 1; t <= T - 1; ++t) {
      const Mat rp = build_r_potential(spec.costs.r1(t), spec.costs.r2(t));
      asym = std::max(asym, relative_gap(rp, rp.transpose()));
      pd = pd && cholesky_pd(rp, tol.pd_pivot).is_pd;
      min_eig = std::min(min_eig, lambda_min(rp));
    }
    e.passed = pd && asym <= tol.symmetry;
    e.margin = asym <= tol.symmetry ? min_eig - tol.pd_pivot : tol.symmetry - asym;
    e.detail = "min eig R^p=" + fmt(min_eig) + ", asymmetry=" + fmt(asym);
  }

  // A5: λ_min(Q) > |q_t|, q_t = σmax(A)/σ⁺min(𝐁) λmax(R^p_t - R^1_t). Each
  // q_t is compared with the Q weighting the state it drives (Q_{t+1}) and
  // with the Q of the same stage (Q_t, t >= 2).
  {
    auto& e = rep.entries[4];
    e.id = "A5";
    try {
      const double ratio =
          singular_extremes(spec.A, tol.singular_value).sigma_max /
          singular_extremes(bb, tol.singular_value).sigma_min_pos;
      double margin = kInf;
      double worst_q = 0.0;
      for (int t = 1; t <= T - 1; ++t) {
        const Mat rp = build_r_potential(spec.costs.r1(t), spec.costs.r2(t));
        const double q = ratio * lambda_max(rp - spec.costs.r1(t));
        worst_q = std::max(worst_q, std::abs(q));
        margin = std::min(margin, lambda_min(spec.costs.q(t + 1)) - std::abs(q));
        if (t >= 2) margin = std::min(margin, lambda_min(spec.costs.q(t)) - std::abs(q));
      }
      e.passed = margin > 0.0;
      e.margin = margin;
      e.detail = "max |q|=" + fmt(worst_q);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::AllZero) throw;
      e.passed = false;
      e.margin = 0.0;
      e.detail = err.what();
    }
  }

  // A6: every padded game (one per last revealed stage) satisfies A1.
  {
    auto& e = rep.entries[5];
    e.id = "A6";
    e.passed = true;
    e.margin = kInf;
    int first_failure = 0;
    for (int last = 1; last <= T - 1; ++last) {
      PaddedSchedule padded = pad_schedule(spec.costs, last, 0);
      const AssumptionEntry a1 =
          evaluate_a1(with_costs(spec, std::move(padded.schedule)), tol);
      e.margin = std::min(e.margin, a1.margin);
      if (!a1.passed && e.passed) {
        e.passed = false;
        first_failure = last;
      }
    }
    e.detail = e.passed ? "all " + std::to_string(T - 1) + " padded games pass"
                        : "padded game with last known stage " +
                              std::to_string(first_failure) + " fails A1";
  }

  rep.overall = std::all_of(rep.entries.begin(), rep.entries.end(),
                            [](const AssumptionEntry& e) { return e.passed; });
  if (mode == CheckMode::Strict && !rep.overall) {
    for (const auto& e : rep.entries)
      if (!e.passed)
        throw Error(ErrorCode::AssumptionViolated, e.id + ": " + e.detail);
  }
  return rep;
}

OcpReduction reduce_to_ocp(const GameSpec& spec, const Tolerances& tol) {
  spec.validate(tol);
  const AssumptionEntry a1 = evaluate_a1(spec, tol);
  if (!a1.passed)
    throw Error(ErrorCode::AssumptionViolated, "A1: " + a1.detail);
  for (int t = 1; t <= spec.T - 1; ++t) {
    const Mat rp = build_r_potential(spec.costs.r1(t), spec.costs.r2(t));
    if (!cholesky_pd(rp, tol.pd_pivot).is_pd)
      throw Error(ErrorCode::AssumptionViolated, "A4: R^p not positive definite", t);
  }

  const NashSolution nash = solve_feedback_nash(spec, tol);
  const int T = spec.T;
  const Mat bb = spec.joint_b();
  const Mat bbt = bb.transpose();

  OcpReduction red;
  red.R_bar.resize(T - 1);
  red.K_bar_ocp.resize(T - 1);
  red.Q_bar.resize(T - 1);
  red.P_bar.resize(T - 1);

  Mat p_bar = spec.costs.q(T);
  red.Q_bar[T - 2] = p_bar;
  red.P_bar[T - 2] = p_bar;

  for (int t = T - 1; t >= 1; --t) {
    const Mat r_bar = build_r_potential(spec.costs.r1(t), spec.costs.r2(t));
    const Mat bpb = bbt * p_bar * bb;

    const Mat& theta = nash.theta_at(t);
    const double gap = scaled_gap(r_bar, theta - bpb, theta);
    red.r_bar_shortcut_gap = std::max(red.r_bar_shortcut_gap, gap);
    if (gap > tol.equality)
      throw Error(ErrorCode::ReductionMismatch,
                  "R^p differs from Theta - B'P̄B by " + fmt(gap), t);

    const Mat& k = nash.gain(t);
    const Mat correction = k.transpose() * (spec.costs.r1(t) - r_bar) * k;

    Mat k_bar = solve(r_bar + bpb, bbt * p_bar * spec.A) * -1.0;
    if (t >= 2) {
      const Mat q_bar = (spec.costs.q(t) + correction).symmetrized();
      const Mat closed = spec.A + bb * k_bar;
      p_bar = (q_bar + k_bar.transpose() * r_bar * k_bar +
               closed.transpose() * p_bar * closed).symmetrized();
      red.Q_bar[t - 2] = q_bar;
      red.P_bar[t - 2] = p_bar;
    } else {
      red.q_bar_stage1_correction = correction.symmetrized();
    }
    red.R_bar[t - 1] = r_bar;
    red.K_bar_ocp[t - 1] = std::move(k_bar);
  }
  return red;
}

double verify_equivalence(const GameSpec& spec, const Tolerances& tol) {
  const OcpReduction red = reduce_to_ocp(spec, tol);
  const NashSolution nash = solve_feedback_nash(spec, tol);
  double worst = 0.0;
  for (int t = 1; t <= spec.T - 1; ++t)
    worst = std::max(worst, norm2(nash.gain(t) - red.K_bar_ocp[t - 1]));
  return worst;
}

StructureCheck check_sufficient_structure(const GameSpec& spec,
                                          const Tolerances& tol) {
  spec.validate(tol);
  if (spec.m != 1)
    throw Error(ErrorCode::WrongStructure, "each player needs a scalar control");
  for (int row = 1; row < spec.n; ++row)
    if (spec.B1(row, 0) != 0.0 || spec.B2(row, 0) != 0.0)
      throw Error(ErrorCode::WrongStructure,
                  "inputs may only act on the first state");
  const double b1 = -spec.B1(0, 0);
  const double b2 = -spec.B2(0, 0);

  StructureCheck out;
  out.ratio_ok = true;
  for (int t = 1; t <= spec.T - 1; ++t) {
    const Mat& r1 = spec.costs.r1(t);
    const Mat& r2 = spec.costs.r2(t);
    if (r1(0, 1) != 0.0 || r1(1, 0) != 0.0 || r1(1, 1) != 0.0 ||
        r2(0, 0) != 0.0 || r2(0, 1) != 0.0 || r2(1, 0) != 0.0)
      throw Error(ErrorCode::WrongStructure,
                  "control costs must be the single entries r1, r2", t);
    // b1²/r1 = b2²/r2, cross-multiplied so r = 0 does not divide.
    const double lhs = b1 * b1 * r2(1, 1);
    const double rhs = b2 * b2 * r1(0, 0);
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    if (std::abs(lhs - rhs) > 1e-10 * scale) out.ratio_ok = false;
  }

  const NashSolution nash = solve_feedback_nash(spec, tol);
  for (int t = 2; t <= spec.T; ++t)
    out.max_p_gap = std::max(
        out.max_p_gap, norm2(nash.p(Player::One, t) - nash.p(Player::Two, t)));
  return out;
}

}  // namespace lqpg
