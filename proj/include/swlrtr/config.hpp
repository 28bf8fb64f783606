#pragma once

// Text form of SolverConfig. Keys:
//
//   p q k lambda1 lambda2 alpha beta iters inner_iters cycles tol c eps
//   stride window noise_level ranks threads
//
// k accepts "auto" (same as 0), noise_level is "global" or "group", ranks
// is "full" or three comma-separated caps (0 = full for that mode).

#include "swlrtr/solver.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace swlrtr {

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Applies each pair on top of `base`, then validates. All unknown keys,
// malformed values and constraint violations are reported together.
SolverConfig apply_settings(SolverConfig base, const KeyValues& settings, Index bands = 0);

SolverConfig load_config(const std::filesystem::path& path, SolverConfig base = {});

// Round-trips exactly through apply_settings.
KeyValues to_settings(const SolverConfig& cfg);

}  // namespace swlrtr
