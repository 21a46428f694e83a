#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "lqpg/cli.hpp"
#include "lqpg/error.hpp"
#include "lqpg/io.hpp"

using namespace lqpg;
using doctest::Approx;

namespace fs = std::filesystem;

namespace {

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lqpg");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch() {
  const fs::path p = fs::temp_directory_path() / "lqpg_cli_test";
  static bool cleared = false;
  if (!cleared) {
    fs::remove_all(p);
    cleared = true;
  }
  fs::create_directories(p);
  return p;
}

const char* kScalar = R"({"n":1,"m":1,"T":2,"A":[[1]],"B1":[[1]],"B2":[[1]],"x1":[1],
  "Q":[[[1]]],"R1":[[[1,0],[0,0]]],"R2":[[[0,0],[0,1]]]})";

// T = 3, single matrices repeated over the horizon except Q.
const char* kScalar3 = R"({"T":3,"A":[[1]],"B1":[[1]],"B2":[[1]],"x1":[1],
  "Q":[[[1]],[[2]]],"R1":[[1,0],[0,0]],"R2":[[0,0],[0,1]]})";

fs::path write(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  write_text_file(p, text);
  return p;
}

}  // namespace

TEST_CASE("spec json round trip") {
  const GameSpec s = spec_from_json(Json::parse(kScalar));
  CHECK(s.n == 1);
  CHECK(s.costs.r2(1) == Mat{{0, 0}, {0, 1}});
  CHECK(spec_from_json(to_json(s)) == s);

  const GameSpec s3 = spec_from_json(Json::parse(kScalar3));
  CHECK(s3.m == 1);
  CHECK(s3.costs.q(3) == Mat{{2}});
  CHECK(s3.costs.r1(2) == s3.costs.r1(1));

  CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"T":2})")), Error);
  CHECK_THROWS_AS(spec_from_json(Json::parse(
                      R"({"T":3,"A":[[1]],"B1":[[1]],"B2":[[1]],"x1":[1],
                          "Q":[[[1]]],"R1":[[1,0],[0,0]],"R2":[[0,0],[0,1]]})")),
                  Error);
  CHECK_THROWS_AS(mat_from_json(Json::parse("[[1,2],[3]]")), Error);
}

TEST_CASE("config and tolerance json") {
  ExperimentConfig c;
  c.runs = 7;
  c.T_range = {5, 10};
  c.d_convention = DConvention::Magnitude;
  c.cost_ratio = CostRatio::InverseBeta;
  const ExperimentConfig back = config_from_json(to_json(c));
  CHECK(back.runs == 7);
  CHECK(back.T_range == std::vector<int>{5, 10});
  CHECK(back.d_convention == DConvention::Magnitude);
  CHECK(back.cost_ratio == CostRatio::InverseBeta);
  CHECK(to_json(back) == to_json(c));
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"runs":0})")), Error);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"d_convention":"odd"})")), Error);

  const Tolerances t = tolerances_from_json(Json::parse(R"({"equality":1e-6})"));
  CHECK(t.equality == 1e-6);
  CHECK(t.pd_pivot == 1e-10);
  CHECK_THROWS_AS(tolerances_from_json(Json::parse(R"({"bogus":1})")), Error);
}

TEST_CASE("validate") {
  const auto spec = write("scalar.json", kScalar);
  CHECK(cli({"validate", "--spec", spec.string()}) == 0);
  CHECK(cli({"validate", "--spec", spec.string(), "--strict"}) == 0);

  ExperimentConfig c;
  const auto battery = write("battery.json", to_json(generate_game(c, 5, 1)).dump());
  CHECK(cli({"validate", "--spec", battery.string()}) == 0);
  CHECK(cli({"validate", "--spec", battery.string(), "--strict"}) == 2);
}

TEST_CASE("solve output passes the deviation oracle") {
  const auto spec_path = write("scalar.json", kScalar);
  const auto out = scratch() / "nash.json";
  CHECK(cli({"solve", "--spec", spec_path.string(), "--out", out.string()}) == 0);
  const GameSpec spec = spec_from_json(read_json_file(spec_path));
  const NashSolution nash = nash_from_json(read_json_file(out));
  CHECK(nash.gain(1)(0, 0) == Approx(-1.0 / 3));
  for (double d : {0.2, -0.2}) {
    const auto dev = verify_nash_by_deviation(spec, nash, 1, Player::Two, {d});
    CHECK(dev.cost_deviated >= dev.cost_at_nash - 1e-8);
  }
}

TEST_CASE("run with full preview") {
  const auto spec = write("scalar3.json", kScalar3);
  const auto out = scratch() / "run.json";
  CHECK(cli({"run", "--spec", spec.string(), "--preview", "2", "--out", out.string()}) == 0);
  const Json j = read_json_file(out);
  CHECK(std::abs(j.at("pou").get<double>()) <= 1e-12);
  CHECK(j.at("logRelPoU").is_null());
  CHECK(j.at("x").size() == 3);
  CHECK(j.at("tracking_error").size() == 2);

  const auto gain = write("gain.json", "[[-0.5],[-0.5]]");
  CHECK(cli({"run", "--spec", spec.string(), "--preview", "0", "--gain", gain.string(),
             "--out", out.string()}) == 0);
  CHECK(read_json_file(out).at("K_tracking") == Json::parse("[[-0.5],[-0.5]]"));
  CHECK(read_json_file(out).at("logRelPoU").is_number());
}

TEST_CASE("sweep and plot") {
  const auto config = write("paper.json",
                            R"({"T_range":[10],"W_range":[0,1,2],"runs":3,"seed":5})");
  const auto dir = scratch() / "out";
  CHECK(cli({"sweep", "--config", config.string(), "--out-dir", dir.string()}) == 0);
  const std::string rows = read_text_file(dir / "rows.csv");
  const std::string agg = read_text_file(dir / "agg.csv");
  CHECK(rows.rfind("T,W,seed,pou,nash_social_cost,log_rel_pou\n", 0) == 0);
  CHECK(agg.rfind("T,W,mean_pou,mean_nash_cost,log_rel_pou\n", 0) == 0);
  CHECK(std::count(rows.begin(), rows.end(), '\n') == 10);

  CHECK(cli({"sweep", "--config", config.string(), "--out-dir", dir.string(), "--runs", "2",
             "--seed", "9"}) == 0);
  CHECK(read_text_file(dir / "rows.csv").find(",9,") != std::string::npos);

  const auto svg = scratch() / "w.svg";
  CHECK(cli({"plot", "--in", (dir / "agg.csv").string(), "--x", "W", "--out", svg.string()}) ==
        0);
  CHECK(read_text_file(svg).rfind("<svg", 0) == 0);
}

TEST_CASE("exit codes") {
  CHECK(cli({}) == 1);
  CHECK(cli({"bogus"}) == 1);
  CHECK(cli({"solve"}) == 1);
  CHECK(cli({"plot", "--in", "x", "--x", "Q", "--out", "y"}) == 1);
  CHECK(cli({"solve", "--spec", (scratch() / "missing.json").string()}) == 1);

  const auto bad_theta = write(
      "bad.json", R"({"T":2,"A":[[1]],"B1":[[1]],"B2":[[1]],"x1":[1],
                     "Q":[[1]],"R1":[[-3,0],[0,0]],"R2":[[0,0],[0,1]]})");
  CHECK(cli({"solve", "--spec", bad_theta.string()}) == 3);

  const auto unstab = write(
      "unstab.json", R"({"T":3,"A":[[2,0],[0,1.5]],"B1":[[1],[0]],"B2":[[1],[0]],"x1":[1,1],
                        "Q":[[1,0],[0,1]],"R1":[[1,0],[0,0]],"R2":[[0,0],[0,1]]})");
  CHECK(cli({"run", "--spec", unstab.string(), "--preview", "0"}) == 3);

  const auto spec = write("scalar.json", kScalar);
  CHECK(cli({"--tol", R"({"pd_pivot":1e-9})", "validate", "--spec", spec.string()}) == 0);
  CHECK(cli({"--tol", "{not json", "validate", "--spec", spec.string()}) == 1);
}
