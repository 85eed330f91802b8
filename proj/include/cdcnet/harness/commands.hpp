#pragma once

#include <exception>
#include <ostream>
#include <string>
#include <vector>

#include "cdcnet/harness/run_config.hpp"
#include "cdcnet/tensor/errors.hpp"

namespace cdcnet {

/// gen, train, search, derive, eval, gradcheck, infer.
const std::vector<std::string>& command_names();

/// Runs one command with a config that has not been resolved yet. Human
/// tables go to `out`, or one JSON object per line when `json` is set.
/// Failures are thrown as cdcnet::Error.
void run_command(const std::string& name, const RunConfig& config, std::ostream& out, bool json);

/// 2 config, 3 data or shape, 4 numeric, 5 I/O, 1 anything else.
int exit_code(const std::exception& e);
/// `error[<kind>]: <message>` on one line.
std::string error_line(const std::exception& e);

}  // namespace cdcnet
