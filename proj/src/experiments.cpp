#include "lqpg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include "lqpg/error.hpp"
#include "lqpg/online.hpp"

namespace lqpg {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double draw(const Uniform& u, std::uint64_t seed, int t, DrawTag tag) {
  return u.low + (u.high - u.low) *
                     counter_uniform(seed, t, static_cast<std::uint32_t>(tag));
}

void check_uniform(const Uniform& u, const char* name) {
  if (!(std::isfinite(u.low) && std::isfinite(u.high) && u.low < u.high))
    throw Error(ErrorCode::InvalidConfig,
                std::string(name) + " needs finite low < high");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (runs < 1) throw Error(ErrorCode::InvalidConfig, "runs must be >= 1");
  if (T_range.empty() || W_range.empty())
    throw Error(ErrorCode::InvalidConfig, "T_range and W_range must be non-empty");
  for (int T : T_range)
    if (T < 2) throw Error(ErrorCode::InvalidConfig, "every T must be >= 2");
  for (int W : W_range)
    if (W < 0) throw Error(ErrorCode::InvalidConfig, "every W must be >= 0");
  check_uniform(beta_dist, "beta_dist");
  check_uniform(l_dist, "l_dist");
  check_uniform(d_dist, "d_dist");
  if (beta_dist.low <= 0.0)
    throw Error(ErrorCode::InvalidConfig, "beta_dist must be positive");
  if (x1.size() != 2) throw Error(ErrorCode::InvalidConfig, "x1 must have 2 entries");
  if (!std::isfinite(a) || !std::isfinite(b1) || !std::isfinite(b2))
    throw Error(ErrorCode::InvalidConfig, "a, b1, b2 must be finite");
  if (threads < 1) throw Error(ErrorCode::InvalidConfig, "threads must be >= 1");
}

double counter_uniform(std::uint64_t seed, int t, std::uint32_t tag) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(t)));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(tag) << 32));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

GameSpec generate_game(const ExperimentConfig& config, int T,
                       std::uint64_t seed) {
  config.validate();
  if (T < 2) throw Error(ErrorCode::InvalidConfig, "T must be >= 2");

  GameSpec spec;
  spec.n = 2;
  spec.m = 1;
  spec.T = T;
  spec.A = Mat{{config.a, 0.0}, {0.0, 0.9}};
  spec.B1 = Mat{{-config.b1}, {0.0}};
  spec.B2 = Mat{{-config.b2}, {0.0}};
  spec.x1 = config.x1;

  std::vector<Mat> q, r1, r2;
  for (int t = 1; t <= T - 1; ++t) {
    const int beta_stage = config.time_invariant ? 1 : t;
    const int q_stage = config.time_invariant ? 2 : t + 1;

    const double beta = draw(config.beta_dist, seed, beta_stage, DrawTag::Beta);
    const double ratio = config.cost_ratio == CostRatio::Beta ? beta : 1.0 / beta;
    r1.push_back(Mat{{config.b1 * config.b1 / ratio, 0.0}, {0.0, 0.0}});
    r2.push_back(Mat{{0.0, 0.0}, {0.0, config.b2 * config.b2 / ratio}});

    const double l = draw(config.l_dist, seed, q_stage, DrawTag::L);
    double d = draw(config.d_dist, seed, q_stage, DrawTag::D);
    if (config.d_convention == DConvention::Magnitude) d = std::abs(d);
    q.push_back(Mat{{l, -d}, {-d, 0.0}});
  }
  spec.costs = CostSchedule(std::move(q), std::move(r1), std::move(r2));
  return spec;
}

SweepResult sweep(const ExperimentConfig& config, const Tolerances& tol) {
  config.validate();
  const std::size_t n_t = config.T_range.size();
  const std::size_t n_w = config.W_range.size();
  const std::size_t runs = static_cast<std::size_t>(config.runs);

  // A and 𝐁 do not depend on the draws, so one tracking gain serves all cells.
  const Mat k_tracking = compute_tracking_gain(
      generate_game(config, config.T_range.front(), config.seed), tol);

  std::vector<SweepRow> rows(n_t * runs * n_w);
  auto run_task = [&](std::size_t task) {
    const std::size_t ti = task / runs;
    const std::size_t r = task % runs;
    const int T = config.T_range[ti];
    const std::uint64_t seed = config.seed + r;
    SweepRow* out = &rows[task * n_w];
    for (std::size_t wi = 0; wi < n_w; ++wi) {
      out[wi].T = T;
      out[wi].W = config.W_range[wi];
      out[wi].seed = seed;
    }
    std::optional<NashSolution> nash;
    std::optional<GameSpec> spec;
    try {
      spec = generate_game(config, T, seed);
      if (config.assumption_mode == CheckMode::Strict)
        check_assumptions(*spec, CheckMode::Strict, tol);
      nash = solve_feedback_nash(*spec, tol);
    } catch (const Error& e) {
      for (std::size_t wi = 0; wi < n_w; ++wi) out[wi].failure = e.what();
      return;
    }
    for (std::size_t wi = 0; wi < n_w; ++wi) {
      try {
        const OnlineRun run =
            run_online(*spec, config.W_range[wi], k_tracking, tol, &*nash);
        out[wi].pou = run.pou;
        out[wi].nash_social_cost = run.nash_social_cost;
        out[wi].log_rel_pou = run.log_rel_pou;
      } catch (const Error& e) {
        out[wi].failure = e.what();
      }
    }
  };

  const std::size_t tasks = n_t * runs;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.threads), tasks);
  if (workers <= 1) {
    for (std::size_t task = 0; task < tasks; ++task) run_task(task);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t task = next++; task < tasks; task = next++) run_task(task);
      });
  }

  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.T, a.W, a.seed) < std::tie(b.T, b.W, b.seed);
  });

  SweepResult result;
  result.rows = std::move(rows);
  for (std::size_t i = 0; i < result.rows.size();) {
    SweepAggregate agg;
    agg.T = result.rows[i].T;
    agg.W = result.rows[i].W;
    double sum_pou = 0.0;
    double sum_cost = 0.0;
    for (; i < result.rows.size() && result.rows[i].T == agg.T &&
           result.rows[i].W == agg.W;
         ++i) {
      const SweepRow& row = result.rows[i];
      if (!row.failure.empty()) continue;
      sum_pou += *row.pou;
      sum_cost += *row.nash_social_cost;
      ++agg.cells;
    }
    if (agg.cells > 0) {
      agg.mean_pou = sum_pou / agg.cells;
      agg.mean_nash_cost = sum_cost / agg.cells;
      if (*agg.mean_pou != 0.0 && *agg.mean_nash_cost != 0.0)
        agg.log_rel_pou = std::log(std::abs(*agg.mean_pou / *agg.mean_nash_cost));
    }
    result.aggregates.push_back(agg);
  }
  return result;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string opt_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::optional<double> parse_opt(const std::string& field, int line) {
  if (field.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    throw Error(ErrorCode::ParseError,
                "bad number '" + field + "' on line " + std::to_string(line));
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::string rows_csv(const SweepResult& result) {
  std::string out = "T,W,seed,pou,nash_social_cost,log_rel_pou\n";
  for (const auto& row : result.rows) {
    out += std::to_string(row.T) + ',' + std::to_string(row.W) + ',' +
           std::to_string(row.seed) + ',' + opt_field(row.pou) + ',' +
           opt_field(row.nash_social_cost) + ',' + opt_field(row.log_rel_pou) +
           '\n';
  }
  return out;
}

std::string aggregates_csv(const SweepResult& result) {
  std::string out = "T,W,mean_pou,mean_nash_cost,log_rel_pou\n";
  for (const auto& agg : result.aggregates) {
    out += std::to_string(agg.T) + ',' + std::to_string(agg.W) + ',' +
           opt_field(agg.mean_pou) + ',' + opt_field(agg.mean_nash_cost) + ',' +
           opt_field(agg.log_rel_pou) + '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  f << text;
  f.close();
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void emit_csv(const SweepResult& result, const std::filesystem::path& dir) {
  if (result.rows.empty()) throw Error(ErrorCode::EmptyAggregate, "no rows to emit");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());
  write_text_file(dir / "rows.csv", rows_csv(result));
  write_text_file(dir / "agg.csv", aggregates_csv(result));
}

std::vector<SweepAggregate> parse_aggregates_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      split_csv_line(line) !=
          std::vector<std::string>{"T", "W", "mean_pou", "mean_nash_cost", "log_rel_pou"})
    throw Error(ErrorCode::ParseError, "missing aggregate CSV header");
  std::vector<SweepAggregate> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5)
      throw Error(ErrorCode::ParseError,
                  "expected 5 fields on line " + std::to_string(lineno));
    SweepAggregate agg;
    const auto t = parse_opt(f[0], lineno);
    const auto w = parse_opt(f[1], lineno);
    if (!t || !w) throw Error(ErrorCode::ParseError,
                              "T and W required on line " + std::to_string(lineno));
    agg.T = static_cast<int>(*t);
    agg.W = static_cast<int>(*w);
    agg.mean_pou = parse_opt(f[2], lineno);
    agg.mean_nash_cost = parse_opt(f[3], lineno);
    agg.log_rel_pou = parse_opt(f[4], lineno);
    out.push_back(agg);
  }
  return out;
}

std::string render_plot(const std::vector<SweepAggregate>& aggregates,
                        PlotAxis x_axis) {
  // series key -> sorted (x, y) points
  std::map<int, std::vector<std::pair<double, double>>> series;
  for (const auto& agg : aggregates) {
    if (!agg.log_rel_pou) continue;
    const int x = x_axis == PlotAxis::T ? agg.T : agg.W;
    const int key = x_axis == PlotAxis::T ? agg.W : agg.T;
    series[key].emplace_back(x, *agg.log_rel_pou);
  }
  if (series.empty())
    throw Error(ErrorCode::EmptyAggregate, "no finite log_rel_pou to plot");

  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (auto& [key, pts] : series) {
    std::sort(pts.begin(), pts.end());
    for (const auto& [x, y] : pts) {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (x_hi == x_lo) { x_lo -= 1; x_hi += 1; }
  if (y_hi == y_lo) { y_lo -= 1; y_hi += 1; }
  const double y_pad = 0.05 * (y_hi - y_lo);
  y_lo -= y_pad;
  y_hi += y_pad;

  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 130, kTop = 30,
                   kBottom = 60;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * ph; };
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
  };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  const char* x_name = x_axis == PlotAxis::T ? "T" : "W";
  const char* key_name = x_axis == PlotAxis::T ? "W" : "T";

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw
      << "\" y2=\"" << kTop + ph << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kTop + ph << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 4;
    const double yv = y_lo + (y_hi - y_lo) * i / 4;
    svg << "<text x=\"" << sx(xv) << "\" y=\"" << kTop + ph + 18
        << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(yv) + 4
        << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 15
      << "\" text-anchor=\"middle\">" << x_name << "</text>\n";
  svg << "<text x=\"18\" y=\"" << kTop + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << kTop + ph / 2
      << ")\">logRelPoU</text>\n";

  std::size_t idx = 0;
  for (const auto& [key, pts] : series) {
    const char* color = kColors[idx % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k)
      svg << (k ? " " : "") << sx(pts[k].first) << ',' << sy(pts[k].second);
    svg << "\"/>\n";
    for (const auto& [x, y] : pts)
      svg << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
    const double ly = kTop + 16.0 * idx + 8;
    svg << "<line x1=\"" << kLeft + pw + 15 << "\" y1=\"" << ly << "\" x2=\""
        << kLeft + pw + 35 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"1.5\"/>\n";
    svg << "<text x=\"" << kLeft + pw + 40 << "\" y=\"" << ly + 4 << "\">" << key_name
        << "=" << key << "</text>\n";
    ++idx;
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const std::vector<SweepAggregate>& aggregates, PlotAxis x_axis,
               const std::filesystem::path& path) {
  write_text_file(path, render_plot(aggregates, x_axis));
}

}  // namespace lqpg
