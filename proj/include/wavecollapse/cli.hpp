#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "wavecollapse/config.hpp"

namespace wavecollapse {

enum class RunMode { kSingle, kEnsemble, kVerify, kDumpOperators };

std::string_view to_string(RunMode mode);
RunMode run_mode_from_string(std::string_view name);

// Raw key = value settings. Keys use the flag spelling without dashes
// ("n-photons"); underscores are accepted and normalized.
using Settings = std::map<std::string, std::string>;

// Flat "key = value" text; '#' starts a comment, blank lines are ignored.
Settings parse_settings(std::string_view text);
Settings read_settings_file(const std::string& path);

// Builds a validated SimConfig. The psi0 family is resolved first so its
// defaults apply, then every setting is applied on top. An empty value is
// a missing value and is rejected with an error naming the key.
SimConfig config_from_settings(const Settings& settings);

// Keys config_from_settings understands.
const std::vector<std::string>& known_setting_keys();

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitRuntime = 3,
};

// Runs one mode and writes its report files into config.out_dir.
// verify_only limits the verify mode to some criterion ids (empty = all).
int run_mode(RunMode mode, const SimConfig& config, std::ostream& out,
             const std::vector<int>& verify_only = {});

// Full command-line entry point. Errors are reported on err as a one-line
// JSON object {"error": code, "message": text}.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wavecollapse
