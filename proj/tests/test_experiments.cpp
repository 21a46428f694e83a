#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "lqpg/error.hpp"
#include "lqpg/experiments.hpp"
#include "lqpg/potential.hpp"

using namespace lqpg;
using doctest::Approx;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lqpg_exp_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config validation") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.runs = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.T_range.clear();
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.l_dist = {5, 5};
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.T_range = {1};
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("counter draws are uniform and keyed") {
  double sum = 0;
  const int count = 20000;
  for (int i = 0; i < count; ++i) {
    const double u = counter_uniform(5, i, 1);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(sum / count == Approx(0.5).epsilon(0.02));
  CHECK(counter_uniform(5, 3, 1) == counter_uniform(5, 3, 1));
  CHECK(counter_uniform(5, 3, 1) != counter_uniform(5, 3, 2));
  CHECK(counter_uniform(5, 3, 1) != counter_uniform(6, 3, 1));
}

TEST_CASE("generated game structure") {
  ExperimentConfig c;
  const GameSpec s = generate_game(c, 6, 42);
  CHECK(s.A == Mat{{1.6, 0}, {0, 0.9}});
  CHECK(s.joint_b() == Mat{{-0.85, -0.89}, {0, 0}});
  CHECK(s.x1 == Vec{1, 1});
  for (int t = 1; t <= 5; ++t) {
    const double r1 = s.costs.r1(t)(0, 0);
    const double r2 = s.costs.r2(t)(1, 1);
    const double beta = 0.85 * 0.85 / r1;
    CHECK(beta >= 10.0);
    CHECK(beta <= 110.0);
    CHECK(0.89 * 0.89 / r2 == Approx(beta).epsilon(1e-14));
    const Mat& q = s.costs.q(t + 1);
    CHECK(q(1, 1) == 0.0);
    CHECK(q(0, 1) == q(1, 0));
    CHECK(-q(0, 1) <= -10.0);  // d drawn from [-110, -10]
    CHECK(q(0, 0) >= 10.0);
  }
  // β = 10 gives the reference control weights.
  c.beta_dist = {10.0, 10.0 + 1e-12};
  const GameSpec fixed = generate_game(c, 3, 1);
  CHECK(fixed.costs.r1(1)(0, 0) == Approx(0.07225).epsilon(1e-10));
  CHECK(fixed.costs.r2(1)(1, 1) == Approx(0.07921).epsilon(1e-10));
}

TEST_CASE("generation is deterministic and prefix-stable") {
  ExperimentConfig c;
  CHECK(generate_game(c, 10, 7) == generate_game(c, 10, 7));
  const GameSpec short_game = generate_game(c, 5, 7);
  const GameSpec long_game = generate_game(c, 12, 7);
  for (int t = 1; t <= 4; ++t) {
    CHECK(short_game.costs.q(t + 1) == long_game.costs.q(t + 1));
    CHECK(short_game.costs.r1(t) == long_game.costs.r1(t));
  }
  CHECK_FALSE(generate_game(c, 5, 7) == generate_game(c, 5, 8));
}

TEST_CASE("d conventions and cost ratio") {
  ExperimentConfig c;
  c.d_convention = DConvention::Magnitude;
  const GameSpec mag = generate_game(c, 4, 3);
  c.d_convention = DConvention::Literal;
  const GameSpec lit = generate_game(c, 4, 3);
  CHECK(mag.costs.q(2)(0, 1) == -lit.costs.q(2)(0, 1));

  c.cost_ratio = CostRatio::InverseBeta;
  const GameSpec inv = generate_game(c, 4, 3);
  const double beta = 0.85 * 0.85 / lit.costs.r1(1)(0, 0);
  CHECK(inv.costs.r1(1)(0, 0) == Approx(0.85 * 0.85 * beta).epsilon(1e-12));
}

TEST_CASE("generated games meet the sufficient condition") {
  ExperimentConfig c;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto sc = check_sufficient_structure(generate_game(c, 20, seed));
    CHECK(sc.ratio_ok);
    CHECK(sc.max_p_gap <= 1e-8);
  }
}

TEST_CASE("time-invariant single cell has zero pou") {
  ExperimentConfig c;
  c.time_invariant = true;
  c.runs = 1;
  c.T_range = {8};
  c.W_range = {1};
  const SweepResult r = sweep(c);
  REQUIRE(r.rows.size() == 1);
  REQUIRE(r.rows[0].pou.has_value());
  CHECK(*r.rows[0].pou == 0.0);
  CHECK_FALSE(r.rows[0].log_rel_pou.has_value());
  CHECK(r.aggregates.size() == 1);
  CHECK_FALSE(r.aggregates[0].log_rel_pou.has_value());
  const std::string csv = rows_csv(r);
  CHECK(csv.substr(0, csv.find('\n')) == "T,W,seed,pou,nash_social_cost,log_rel_pou");
  CHECK(csv.back() == '\n');
  CHECK(csv.substr(csv.rfind(',', csv.size() - 2)) == ",\n");
}

TEST_CASE("sweep layout, aggregation and determinism") {
  ExperimentConfig c;
  c.runs = 4;
  c.T_range = {6, 4};
  c.W_range = {2, 0};
  const SweepResult r = sweep(c);
  CHECK(r.rows.size() == 16);
  CHECK(r.aggregates.size() == 4);
  CHECK(r.rows.front().T == 4);
  CHECK(r.rows.front().W == 0);
  for (const auto& agg : r.aggregates) {
    double pou = 0, cost = 0;
    int cells = 0;
    for (const auto& row : r.rows)
      if (row.T == agg.T && row.W == agg.W) {
        pou += *row.pou;
        cost += *row.nash_social_cost;
        ++cells;
      }
    CHECK(agg.cells == cells);
    CHECK(*agg.mean_pou == Approx(pou / cells).epsilon(1e-14));
    if (pou == 0.0)
      CHECK_FALSE(agg.log_rel_pou.has_value());  // full preview at T = 4, W = 2
    else
      CHECK(*agg.log_rel_pou == Approx(std::log(std::abs(pou / cost))).epsilon(1e-12));
  }
  CHECK(rows_csv(sweep(c)) == rows_csv(r));

  c.threads = 3;
  const SweepResult parallel = sweep(c);
  CHECK(rows_csv(parallel) == rows_csv(r));
  CHECK(aggregates_csv(parallel) == aggregates_csv(r));
}

TEST_CASE("failed cells are flagged, not fatal") {
  ExperimentConfig c;
  c.runs = 2;
  c.T_range = {5};
  c.W_range = {0, 1};
  c.assumption_mode = CheckMode::Strict;  // the battery Q is indefinite
  const SweepResult r = sweep(c);
  CHECK(r.rows.size() == 4);
  for (const auto& row : r.rows) {
    CHECK_FALSE(row.failure.empty());
    CHECK_FALSE(row.pou.has_value());
  }
  CHECK_FALSE(r.aggregates[0].mean_pou.has_value());
  CHECK(rows_csv(r).find("5,0,1,,,\n") != std::string::npos);
}

TEST_CASE("csv round trip and files") {
  ExperimentConfig c;
  c.runs = 3;
  c.T_range = {6};
  c.W_range = {0, 1, 2};
  const SweepResult r = sweep(c);
  const fs::path dir = scratch("csv");
  emit_csv(r, dir / "out");
  const std::string rows = read_text_file(dir / "out" / "rows.csv");
  const std::string agg = read_text_file(dir / "out" / "agg.csv");
  CHECK(rows == rows_csv(r));
  CHECK(agg.substr(0, agg.find('\n')) == "T,W,mean_pou,mean_nash_cost,log_rel_pou");
  emit_csv(r, dir / "out");
  CHECK(read_text_file(dir / "out" / "rows.csv") == rows);

  const auto parsed = parse_aggregates_csv(agg);
  REQUIRE(parsed.size() == r.aggregates.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].T == r.aggregates[i].T);
    CHECK(parsed[i].W == r.aggregates[i].W);
    CHECK(parsed[i].log_rel_pou == r.aggregates[i].log_rel_pou);  // exact round trip
    CHECK(parsed[i].mean_pou == r.aggregates[i].mean_pou);
  }
  CHECK_THROWS_AS(parse_aggregates_csv("a,b\n1,2\n"), Error);
  CHECK_THROWS_AS(parse_aggregates_csv("T,W,mean_pou,mean_nash_cost,log_rel_pou\n1,2,x,,\n"),
                  Error);
  CHECK_THROWS_AS(read_text_file(dir / "missing.csv"), Error);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3, -2.5e-300, 1e21, 123456789.125, 0.0}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("plots") {
  std::vector<SweepAggregate> one{{20, 1, 1, 0.1, 1.0, -2.0}};
  const std::string single = render_plot(one, PlotAxis::W);
  CHECK(single.find("<svg") == 0);
  CHECK(single.find("<circle") != std::string::npos);
  CHECK(single.find("<polyline") != std::string::npos);

  std::vector<SweepAggregate> sweep_w;
  for (int w = 0; w <= 6; ++w) sweep_w.push_back({20, w, 1, 0.1, 1.0, -1.0 * w});
  sweep_w.push_back({25, 0, 1, 0.1, 1.0, -0.5});
  const std::string svg = render_plot(sweep_w, PlotAxis::W);
  CHECK(svg.find("T=20") != std::string::npos);
  CHECK(svg.find("T=25") != std::string::npos);
  CHECK(svg.find("logRelPoU") != std::string::npos);

  std::vector<SweepAggregate> empty{{20, 1, 0, std::nullopt, std::nullopt, std::nullopt}};
  try {
    render_plot(empty, PlotAxis::T);
    FAIL("expected EmptyAggregate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyAggregate);
  }
  const fs::path dir = scratch("plot");
  emit_plot(sweep_w, PlotAxis::W, dir / "w.svg");
  CHECK(fs::exists(dir / "w.svg"));
  CHECK_THROWS_AS(emit_plot(sweep_w, PlotAxis::W, dir / "no" / "such" / "w.svg"), Error);
}
