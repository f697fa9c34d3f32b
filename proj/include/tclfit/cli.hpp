#pragma once

namespace tclfit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

/// Entry point of the `tclfit` tool: synth, fit, simulate, evaluate, report.
int run_cli(int argc, const char* const* argv);

}  // namespace tclfit
