#include "lqpg/cli.hpp"

int main(int argc, char** argv) { return lqpg::run_cli(argc, argv); }
