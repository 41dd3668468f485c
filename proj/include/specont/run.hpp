#pragma once

#include <iosfwd>
#include <string>

#include "specont/config.hpp"

namespace specont {

// CLI exit codes, stable for scripting.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNotAdmissible = 2;
inline constexpr int kExitResidualBound = 3;
inline constexpr int kExitSolveFailure = 4;
inline constexpr int kExitNumeric = 5;
inline constexpr int kExitConfig = 64;

int exit_code_for(errc c);

int cmd_admissibility(const RunConfig& cfg, std::ostream& log);
int cmd_solve(const RunConfig& cfg, std::ostream& log);
int cmd_spectrum(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);
int cmd_sweep(const RunConfig& cfg, std::ostream& log);
int cmd_continue_eval(const RunConfig& cfg, std::ostream& log);

}  // namespace specont
