#pragma once

// JSON encodings of the library's records.
//
// GameSpec:  {"n","m","T","A","B1","B2","x1","Q","R1","R2"}
//   matrices are arrays of rows; "Q" lists Q_2..Q_T and "R1"/"R2" list
//   R_1..R_{T-1}. A single matrix in place of a list is repeated over the
//   horizon. "n" and "m" may be omitted and are then read off A and B1.

#include <filesystem>

#include "json.hpp"
#include "lqpg/experiments.hpp"
#include "lqpg/game.hpp"
#include "lqpg/linalg.hpp"
#include "lqpg/online.hpp"
#include "lqpg/potential.hpp"

namespace lqpg {

using Json = nlohmann::json;

Json to_json(const Mat& m);
Mat mat_from_json(const Json& j);

Json to_json(const GameSpec& spec);
GameSpec spec_from_json(const Json& j);

Json to_json(const NashSolution& nash);
NashSolution nash_from_json(const Json& j);

Json to_json(const AssumptionReport& report);
Json to_json(const OnlineRun& run);

Json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults.
ExperimentConfig config_from_json(const Json& j);

Json to_json(const Tolerances& tol);
/// Overrides only the keys present.
Tolerances tolerances_from_json(const Json& j, Tolerances base = {});

/// Throws IoError or ParseError.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace lqpg
