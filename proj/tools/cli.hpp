//
// Copyright 2026 The vprisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef VPRISK_TOOLS_CLI_HPP_
#define VPRISK_TOOLS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace vprisk::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kUsage = 2,
  kInternal = 3,
};

// Runs the command line `args` (args[0] is the program name). Human-readable
// output goes to `out`; errors go to `err` as one JSON object per line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vprisk::cli

#endif  // VPRISK_TOOLS_CLI_HPP_
