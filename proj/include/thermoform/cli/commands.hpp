#pragma once

#include <filesystem>
#include <string>

#include "thermoform/cli/config.hpp"

namespace thermoform::cli {

struct RunOptions {
  std::filesystem::path out_dir = "out";
};

/// Each command writes its artifacts under options.out_dir (created if
/// needed), including the normalized config echo, and returns the JSON
/// summary it wrote.
Json cmd_pressure(const RunConfig& config, const RunOptions& options);
Json cmd_spectrum(const RunConfig& config, const RunOptions& options);
Json cmd_domain(const RunConfig& config, const RunOptions& options);
Json cmd_membership(const RunConfig& config, const RunOptions& options);
Json cmd_subdiff(const RunConfig& config, const RunOptions& options);

/// Full command-line entry point. Exit codes: 0 success, 1 failed
/// verification or internal error, 2 configuration error, 3 numeric domain
/// error.
int run_cli(int argc, const char* const* argv);

}  // namespace thermoform::cli
