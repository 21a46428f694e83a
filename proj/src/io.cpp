#include "lqpg/io.hpp"

#include <cmath>

#include "lqpg/error.hpp"

namespace lqpg {

namespace {

Json vec_json(const Vec& v) { return Json(v); }

Json vec_list_json(const std::vector<Vec>& vs) {
  Json out = Json::array();
  for (const auto& v : vs) out.push_back(vec_json(v));
  return out;
}

Json mat_list_json(const std::vector<Mat>& ms) {
  Json out = Json::array();
  for (const auto& m : ms) out.push_back(to_json(m));
  return out;
}

Vec vec_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "expected a number array");
  Vec v;
  for (const auto& e : j) {
    if (!e.is_number()) throw Error(ErrorCode::ParseError, "expected a number");
    v.push_back(e.get<double>());
  }
  return v;
}

std::vector<Vec> vec_list_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "expected an array of vectors");
  std::vector<Vec> out;
  for (const auto& e : j) out.push_back(vec_from_json(e));
  return out;
}

std::vector<Mat> mat_list_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "expected an array of matrices");
  std::vector<Mat> out;
  for (const auto& e : j) out.push_back(mat_from_json(e));
  return out;
}

bool is_matrix(const Json& j) {
  return j.is_array() && !j.empty() && j.front().is_array() &&
         (j.front().empty() || j.front().front().is_number());
}

// One matrix (repeated) or a list of `count` matrices.
std::vector<Mat> schedule_from_json(const Json& j, int count, const char* key) {
  if (is_matrix(j)) return std::vector<Mat>(count, mat_from_json(j));
  auto list = mat_list_from_json(j);
  if (static_cast<int>(list.size()) != count)
    throw Error(ErrorCode::DimensionMismatch,
                std::string(key) + " needs " + std::to_string(count) + " matrices");
  return list;
}

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::ParseError, std::string("missing key '") + key + "'");
  return j.at(key);
}

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Uniform uniform_from_json(const Json& j) {
  const Vec v = vec_from_json(j);
  if (v.size() != 2) throw Error(ErrorCode::ParseError, "a range needs [low, high]");
  return {v[0], v[1]};
}

template <typename F>
auto wrap_parse(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace

Json to_json(const Mat& m) {
  Json out = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Mat mat_from_json(const Json& j) {
  if (!j.is_array() || j.empty())
    throw Error(ErrorCode::ParseError, "a matrix is a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw Error(ErrorCode::ParseError, "matrix rows must be non-empty arrays");
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const Vec row = vec_from_json(j[i]);
    if (row.size() != cols)
      throw Error(ErrorCode::DimensionMismatch, "ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = row[c];
  }
  return m;
}

Json to_json(const GameSpec& spec) {
  return Json{{"n", spec.n},
              {"m", spec.m},
              {"T", spec.T},
              {"A", to_json(spec.A)},
              {"B1", to_json(spec.B1)},
              {"B2", to_json(spec.B2)},
              {"x1", vec_json(spec.x1)},
              {"Q", mat_list_json(spec.costs.q_list())},
              {"R1", mat_list_json(spec.costs.r1_list())},
              {"R2", mat_list_json(spec.costs.r2_list())}};
}

GameSpec spec_from_json(const Json& j) {
  return wrap_parse([&] {
    GameSpec spec;
    spec.T = require(j, "T").get<int>();
    if (spec.T < 2) throw Error(ErrorCode::InvalidConfig, "T must be >= 2");
    spec.A = mat_from_json(require(j, "A"));
    spec.B1 = mat_from_json(require(j, "B1"));
    spec.B2 = mat_from_json(require(j, "B2"));
    spec.x1 = vec_from_json(require(j, "x1"));
    spec.n = j.contains("n") ? j.at("n").get<int>() : static_cast<int>(spec.A.rows());
    spec.m = j.contains("m") ? j.at("m").get<int>() : static_cast<int>(spec.B1.cols());
    const int count = spec.T - 1;
    spec.costs = CostSchedule(schedule_from_json(require(j, "Q"), count, "Q"),
                              schedule_from_json(require(j, "R1"), count, "R1"),
                              schedule_from_json(require(j, "R2"), count, "R2"));
    spec.validate();
    return spec;
  });
}

Json to_json(const NashSolution& nash) {
  return Json{{"K", mat_list_json(nash.K)},
              {"theta", mat_list_json(nash.theta)},
              {"P1", mat_list_json(nash.P1)},
              {"P2", mat_list_json(nash.P2)},
              {"x", vec_list_json(nash.x_star)},
              {"u", vec_list_json(nash.u_star)},
              {"theta_min_eig", vec_json(nash.theta_min_eig)}};
}

NashSolution nash_from_json(const Json& j) {
  return wrap_parse([&] {
    NashSolution nash;
    nash.K = mat_list_from_json(require(j, "K"));
    nash.theta = mat_list_from_json(require(j, "theta"));
    nash.P1 = mat_list_from_json(require(j, "P1"));
    nash.P2 = mat_list_from_json(require(j, "P2"));
    nash.x_star = vec_list_from_json(require(j, "x"));
    nash.u_star = vec_list_from_json(require(j, "u"));
    nash.theta_min_eig = vec_from_json(require(j, "theta_min_eig"));
    const std::size_t stages = nash.K.size();
    if (nash.theta.size() != stages || nash.P1.size() != stages ||
        nash.P2.size() != stages || nash.x_star.size() != stages + 1 ||
        nash.u_star.size() != stages || nash.theta_min_eig.size() != stages)
      throw Error(ErrorCode::DimensionMismatch, "inconsistent solution lengths");
    return nash;
  });
}

Json to_json(const AssumptionReport& report) {
  Json entries = Json::array();
  for (const auto& e : report.entries) {
    entries.push_back(Json{{"id", e.id},
                           {"passed", e.passed},
                           {"margin", std::isfinite(e.margin) ? Json(e.margin) : Json(nullptr)},
                           {"detail", e.detail}});
  }
  return Json{{"overall", report.overall},
              {"entries", entries},
              {"q_eig_min", report.q_eig_min},
              {"q_eig_max", report.q_eig_max},
              {"r_eig_min", report.r_eig_min},
              {"r_eig_max", report.r_eig_max}};
}

Json to_json(const OnlineRun& run) {
  Json x_pred = Json::array();
  for (const auto& traj : run.x_pred) x_pred.push_back(vec_list_json(traj));
  Json u_pred = Json::array();
  for (const auto& traj : run.u_pred) u_pred.push_back(vec_list_json(traj));
  return Json{{"x", vec_list_json(run.x)},
              {"u", vec_list_json(run.u)},
              {"x_pred", x_pred},
              {"u_pred", u_pred},
              {"K_tracking", to_json(run.K_tracking)},
              {"pou", run.pou},
              {"nash_social_cost", run.nash_social_cost},
              {"logRelPoU", opt_json(run.log_rel_pou)},
              {"tracking_error", vec_json(run.tracking_error)}};
}

Json to_json(const ExperimentConfig& c) {
  return Json{
      {"a", c.a},
      {"b1", c.b1},
      {"b2", c.b2},
      {"T_range", c.T_range},
      {"W_range", c.W_range},
      {"runs", c.runs},
      {"seed", c.seed},
      {"beta_dist", {c.beta_dist.low, c.beta_dist.high}},
      {"l_dist", {c.l_dist.low, c.l_dist.high}},
      {"d_dist", {c.d_dist.low, c.d_dist.high}},
      {"d_convention", c.d_convention == DConvention::Literal ? "literal" : "magnitude"},
      {"assumption_mode", c.assumption_mode == CheckMode::Strict ? "strict" : "warn"},
      {"x1", c.x1},
      {"time_invariant", c.time_invariant},
      {"cost_ratio", c.cost_ratio == CostRatio::Beta ? "beta" : "inverse_beta"},
      {"threads", c.threads}};
}

ExperimentConfig config_from_json(const Json& j) {
  return wrap_parse([&] {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be an object");
    ExperimentConfig c;
    if (j.contains("a")) c.a = j.at("a").get<double>();
    if (j.contains("b1")) c.b1 = j.at("b1").get<double>();
    if (j.contains("b2")) c.b2 = j.at("b2").get<double>();
    if (j.contains("T_range")) c.T_range = j.at("T_range").get<std::vector<int>>();
    if (j.contains("W_range")) c.W_range = j.at("W_range").get<std::vector<int>>();
    if (j.contains("runs")) c.runs = j.at("runs").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("beta_dist")) c.beta_dist = uniform_from_json(j.at("beta_dist"));
    if (j.contains("l_dist")) c.l_dist = uniform_from_json(j.at("l_dist"));
    if (j.contains("d_dist")) c.d_dist = uniform_from_json(j.at("d_dist"));
    if (j.contains("d_convention")) {
      const auto s = j.at("d_convention").get<std::string>();
      if (s == "literal") c.d_convention = DConvention::Literal;
      else if (s == "magnitude") c.d_convention = DConvention::Magnitude;
      else throw Error(ErrorCode::InvalidConfig, "d_convention must be literal|magnitude");
    }
    if (j.contains("assumption_mode")) {
      const auto s = j.at("assumption_mode").get<std::string>();
      if (s == "strict") c.assumption_mode = CheckMode::Strict;
      else if (s == "warn") c.assumption_mode = CheckMode::Warn;
      else throw Error(ErrorCode::InvalidConfig, "assumption_mode must be strict|warn");
    }
    if (j.contains("x1")) c.x1 = vec_from_json(j.at("x1"));
    if (j.contains("time_invariant")) c.time_invariant = j.at("time_invariant").get<bool>();
    if (j.contains("cost_ratio")) {
      const auto s = j.at("cost_ratio").get<std::string>();
      if (s == "beta") c.cost_ratio = CostRatio::Beta;
      else if (s == "inverse_beta") c.cost_ratio = CostRatio::InverseBeta;
      else throw Error(ErrorCode::InvalidConfig, "cost_ratio must be beta|inverse_beta");
    }
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    c.validate();
    return c;
  });
}

Json to_json(const Tolerances& t) {
  return Json{{"pd_pivot", t.pd_pivot},
              {"symmetry", t.symmetry},
              {"equality", t.equality},
              {"spectral_margin", t.spectral_margin},
              {"singular_value", t.singular_value}};
}

Tolerances tolerances_from_json(const Json& j, Tolerances base) {
  return wrap_parse([&] {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "tolerances must be an object");
    for (const auto& [key, value] : j.items()) {
      const double v = value.get<double>();
      if (!(v >= 0.0) || !std::isfinite(v))
        throw Error(ErrorCode::InvalidConfig, "tolerance " + key + " must be >= 0");
      if (key == "pd_pivot") base.pd_pivot = v;
      else if (key == "symmetry") base.symmetry = v;
      else if (key == "equality") base.equality = v;
      else if (key == "spectral_margin") base.spectral_margin = v;
      else if (key == "singular_value") base.singular_value = v;
      else throw Error(ErrorCode::InvalidConfig, "unknown tolerance " + key);
    }
    return base;
  });
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace lqpg
