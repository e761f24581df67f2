#pragma once

#include <string>
#include <vector>

#include "fixcalc/error.hpp"

namespace fixcalc::cli {

/// Outcome of one CLI invocation. Exit codes: 0 success, 2 parse error,
/// 3 dimension mismatch, 4 missing data, 5 verification failure,
/// 6 out of range.
struct CommandResult {
  int exit_code = 0;
  std::string out;
  std::string err;
};

/// Dispatch a full argument vector (without the program name).
CommandResult run_cli(const std::vector<std::string>& args);

int exit_code_for(ErrorKind kind);

}  // namespace fixcalc::cli
