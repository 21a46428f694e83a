#pragma once

namespace lqpg {

/// Entry point of the `lqpg` tool. Exit codes: 0 success, 1 usage or input
/// error, 2 assumption failure under --strict, 3 numerical failure.
int run_cli(int argc, char** argv);

}  // namespace lqpg
