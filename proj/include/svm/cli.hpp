#pragma once

#include <iosfwd>
#include <string>

#include "svm/scenario.hpp"
#include "svm/vm.hpp"

namespace svm {

/// Register the scenario's drivers, run to a terminal state and return the
/// report. `scenario` may be null for programs that use no drivers.
RunReport run_scenario(Vm& vm, const Scenario* scenario);

/// Effective configuration and resource usage, one fact per line.
std::string format_config(const Vm& vm);
std::string format_stats(const Vm& vm);

/// The `svm` command line. Returns the process exit status.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace svm
