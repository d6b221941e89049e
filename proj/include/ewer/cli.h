// Copyright 2026 The ewer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EWER_CLI_H_
#define EWER_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace ewer {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Runs the command-line tool. Machine-readable output goes to `out` unless a
// subcommand is given --out; progress and errors go to `err`.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);  // args exclude argv[0]
int RunCli(int argc, char** argv);

}  // namespace ewer

#endif  // EWER_CLI_H_
