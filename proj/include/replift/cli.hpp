#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace replift {

inline constexpr const char* kToolVersion = "replift 1.0.0";

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// SHA-256 over "<relative path>:<file sha256>\n" lines of every regular file
/// below `dir`, in sorted path order.
std::string directory_digest(const std::filesystem::path& dir);

struct LatencyStats {
  double mean_ms = 0.0;  // per frame
  double p99_ms = 0.0;   // per frame
  std::size_t frames = 0;
  int batch = 1;
};

}  // namespace replift
