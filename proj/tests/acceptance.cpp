// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lqpg/error.hpp"
#include "lqpg/experiments.hpp"
#include "lqpg/game.hpp"
#include "lqpg/online.hpp"
#include "lqpg/potential.hpp"
#include "support/random_games.hpp"

using namespace lqpg;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out + "]";
}

std::vector<GameSpec> potential_games(std::uint64_t seed, int count,
                                      const testgen::GameShape& shape) {
  testgen::Rng rng(seed);
  std::vector<GameSpec> games;
  for (int k = 0; k < count; ++k) games.push_back(testgen::potential_game(rng, shape));
  return games;
}

const testgen::GameShape kShape{3, 2, 2, 10};
const testgen::GameShape kSmallShape{3, 2, 2, 6};

bool zero_pou(const OnlineRun& run) {
  return std::abs(run.pou) <= 1e-9 * std::max(1.0, run.nash_social_cost);
}

Outcome full_preview() {
  const auto games = potential_games(101, 50, kShape);
  const auto start = Clock::now();
  double worst = 0;
  bool ok = true;
  for (const auto& g : games) {
    const OnlineRun run = run_online(g, g.T - 1);
    ok = ok && zero_pou(run);
    worst = std::max(worst, std::abs(run.pou) / std::max(1.0, run.nash_social_cost));
  }
  const double secs = seconds_since(start);
  return {ok && secs < 5.0,
          "max |pou|/max(1,cost) = " + fmt(worst) + ", " + fmt(secs) + " s"};
}

Outcome time_invariant() {
  const auto games = potential_games(101, 50, kShape);
  double worst = 0;
  bool ok = true;
  for (const auto& g : games) {
    const GameSpec frozen = testgen::freeze_costs(g);
    for (int W = 0; W <= 2; ++W) {
      const OnlineRun run = run_online(frozen, W);
      ok = ok && zero_pou(run);
      worst = std::max(worst, std::abs(run.pou) / std::max(1.0, run.nash_social_cost));
    }
  }
  return {ok, "150 runs, max relative |pou| = " + fmt(worst)};
}

Outcome deviation() {
  const auto games = potential_games(103, 100, kSmallShape);
  testgen::Rng rng(1003);
  const auto start = Clock::now();
  double worst = INFINITY;
  for (const auto& g : games) {
    const NashSolution nash = solve_feedback_nash(g);
    for (int probe = 0; probe < 20; ++probe) {
      const int t = testgen::uniform_int(rng, 1, g.T - 1);
      const Player i = testgen::uniform_int(rng, 1, 2) == 1 ? Player::One : Player::Two;
      const Vec d = testgen::random_vec(rng, g.m, testgen::uniform(rng, 1e-3, 2.0));
      const auto r = verify_nash_by_deviation(g, nash, t, i, d);
      worst = std::min(worst, r.cost_deviated - r.cost_at_nash);
    }
  }
  const double secs = seconds_since(start);
  return {worst >= -1e-8 && secs < 30.0,
          "2000 probes, min(deviated - nash) = " + fmt(worst) + ", " + fmt(secs) + " s"};
}

Outcome equivalence() {
  const auto games = potential_games(104, 50, kSmallShape);
  double worst = 0;
  for (const auto& g : games) worst = std::max(worst, verify_equivalence(g));
  return {worst <= 1e-8, "max gain gap = " + fmt(worst)};
}

Outcome cost_difference() {
  testgen::Rng rng(105);
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    const GameSpec g = testgen::general_game(rng, testgen::uniform_int(rng, 1, 3),
                                             testgen::uniform_int(rng, 1, 2),
                                             testgen::uniform_int(rng, 2, 8));
    const auto a = testgen::random_gains(rng, g);
    const auto b = testgen::random_gains(rng, g);
    const Player i = k % 2 ? Player::One : Player::Two;
    const auto r = cost_difference_check(g, a, b, i);
    worst = std::max(worst, std::abs(r.lhs - r.rhs));
  }
  return {worst <= 1e-8, "max |lhs - rhs| = " + fmt(worst)};
}

Outcome gain_bounds() {
  const auto games = potential_games(103, 100, kSmallShape);
  double worst_game = -INFINITY;  // max of ‖K‖ - bound
  for (const auto& g : games) {
    const double bound = singular_extremes(g.A).sigma_max /
                         singular_extremes(g.joint_b()).sigma_min_pos;
    for (const Mat& k : solve_feedback_nash(g).K)
      worst_game = std::max(worst_game, norm2(k) - bound);
  }
  testgen::Rng rng(106);
  double worst_kernel = -INFINITY;
  for (int k = 0; k < 100; ++k) {
    const int n = testgen::uniform_int(rng, 1, 5);
    const int m = testgen::uniform_int(rng, 1, n);
    const Mat r = testgen::random_pd(rng, m, 0.01);
    const Mat p = testgen::random_pd(rng, n, 0.01);
    const Mat b = testgen::random_mat(rng, n, m, 2.0);
    const Mat kernel = solve(r + b.transpose() * p * b, b.transpose() * p);
    worst_kernel = std::max(worst_kernel,
                            norm2(kernel) - 1.0 / singular_extremes(b).sigma_min_pos);
  }
  return {worst_game <= 1e-9 && worst_kernel <= 1e-10,
          "max(||K|| - bound) = " + fmt(worst_game) +
              ", max kernel excess = " + fmt(worst_kernel)};
}

Outcome proposition() {
  ExperimentConfig c;
  bool ratio = true;
  double gap = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto r = check_sufficient_structure(generate_game(c, 20, seed));
    ratio = ratio && r.ratio_ok;
    gap = std::max(gap, r.max_p_gap);
  }
  return {ratio && gap <= 1e-8,
          std::string("ratio_ok ") + (ratio ? "everywhere" : "violated") +
              ", max ||P1 - P2|| = " + fmt(gap)};
}

std::vector<double> log_rel(const SweepResult& r) {
  std::vector<double> out;
  for (const auto& a : r.aggregates) out.push_back(a.log_rel_pou.value_or(NAN));
  return out;
}

Outcome preview_sweep() {
  ExperimentConfig c;
  c.T_range = {20};
  c.W_range = {0, 1, 2, 3, 4, 5, 6};
  c.runs = 100;
  c.threads = 1;
  const auto start = Clock::now();
  const SweepResult r = sweep(c);
  const double secs = seconds_since(start);
  const auto v = log_rel(r);
  bool decreasing = true;
  for (std::size_t i = 1; i < v.size(); ++i) decreasing = decreasing && v[i] < v[i - 1];
  const double drop = v.front() - v.back();
  return {decreasing && drop >= 3.0 && secs < 300.0,
          "logRelPoU(W=0..6) = " + join(v) + ", drop " + fmt(drop) + ", " + fmt(secs) + " s"};
}

Outcome horizon_sweep() {
  ExperimentConfig c;
  c.T_range = {5, 10, 15, 20, 25, 30, 35};
  c.W_range = {1};
  c.runs = 100;
  const SweepResult r = sweep(c);
  const auto v = log_rel(r);
  double lo = INFINITY, hi = -INFINITY;
  bool in_band = true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (c.T_range[i] < 15) continue;
    in_band = in_band && v[i] >= -5.5 && v[i] <= -2.5;
    lo = std::min(lo, v[i]);
    hi = std::max(hi, v[i]);
  }
  return {in_band && hi - lo < 1.0,
          "logRelPoU(T=5..35) = " + join(v) + ", spread T>=15 " + fmt(hi - lo)};
}

Outcome gain_decay() {
  ExperimentConfig c;
  const GameSpec g = generate_game(c, 20, c.seed);
  std::vector<double> gaps;
  for (int W = 0; W <= 6; ++W) gaps.push_back(gain_decay_diagnostic(g, W)[4].gap);
  bool ok = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) ok = ok && gaps[i] <= gaps[i - 1] + 1e-10;
  return {ok, "gap at t=5 for W=0..6 = " + join(gaps)};
}

Outcome determinism() {
  ExperimentConfig c;
  c.T_range = {10, 20};
  c.W_range = {0, 1, 2, 3};
  c.runs = 50;
  const SweepResult a = sweep(c);
  const SweepResult b = sweep(c);
  c.threads = 4;
  const SweepResult p = sweep(c);
  const bool same = rows_csv(a) == rows_csv(b) && aggregates_csv(a) == aggregates_csv(b);
  const bool same_parallel =
      rows_csv(a) == rows_csv(p) && aggregates_csv(a) == aggregates_csv(p);
  return {same && same_parallel,
          std::string("repeat ") + (same ? "identical" : "differs") + ", 4 threads " +
              (same_parallel ? "identical" : "differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"full-preview zero PoU", full_preview},
      {"time-invariant zero PoU", time_invariant},
      {"Nash deviation oracle", deviation},
      {"game/OCP equivalence", equivalence},
      {"cost difference identity", cost_difference},
      {"gain bounds", gain_bounds},
      {"sufficient-condition structure", proposition},
      {"logRelPoU decreasing in W (T=20)", preview_sweep},
      {"logRelPoU saturation in T (W=1)", horizon_sweep},
      {"gain-prediction decay in W", gain_decay},
      {"sweep determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %zu: %s  %s  (%s)\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
