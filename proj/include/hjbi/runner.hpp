#pragma once

#include <string>
#include <vector>

#include "hjbi/config.hpp"
#include "hjbi/io.hpp"

namespace hjbi {

// Exit statuses used by the batch front door.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeTrouble = 2;  // domain aborts, strict-mode warnings

struct RunResult {
  int exit_code = kExitOk;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
  std::string error;
};

// Executes one batch command (solve | extract | verify | refine | portfolio)
// against an assembled config, writing all artifacts plus the run manifest
// into the configured output directory.
RunResult run_command(const std::string& command, const Config& config,
                      const std::string& raw_config_text, bool strict);

}  // namespace hjbi
