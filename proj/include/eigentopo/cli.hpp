// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eigentopo {

/// Exit codes of the command-line tool.
enum ExitCode : int
{
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitConfig = 2,
  kExitNumerical = 3
};

/// Runs the tool on `args` (without the program name).
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

std::string version_string();

}  // namespace eigentopo
