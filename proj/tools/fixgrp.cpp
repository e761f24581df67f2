#include <iostream>
#include <string>
#include <vector>

#include "fixcalc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  fixcalc::cli::CommandResult result = fixcalc::cli::run_cli(args);
  std::cout << result.out;
  std::cerr << result.err;
  return result.exit_code;
}
