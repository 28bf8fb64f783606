#pragma once

// Command-line front end. Subcommands:
//
//   simulate <clean.cube> --case N --seed S --out noisy.cube
//   denoise  <noisy.cube> [--config file] [--truth clean.cube] [solver flags] --out prefix
//   metrics  <ref.cube> <test.cube> --out report.csv
//   bench    --sizes 32,64 [--bands B] [solver flags] --out timings.csv
//   replay   <manifest.json> [--out prefix] [--threads T]
//
// Every command that writes files also writes <output>.manifest.json with
// the resolved inputs, configuration and seed; replay re-runs it.

#include <ostream>

namespace swlrtr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace swlrtr
