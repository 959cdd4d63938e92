#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace clonewatch {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;

  bool ok() const noexcept { return exit_code == 0; }
};

using EnvOverrides = std::vector<std::pair<std::string, std::string>>;

// Runs argv[0] (looked up on PATH) without a shell and captures both output
// streams. Throws Error(Io) only when the process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::filesystem::path& cwd = {},
                          const EnvOverrides& env = {});

} // namespace clonewatch
