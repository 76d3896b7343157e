/*
 * Copyright 2026 The reljudge Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line entry point. Subcommands:
//
//   build-dataset    generation log -> labeled train/eval splits
//   export           labeled records -> rl / coldstart / distill JSONL
//   rollout          pairs + backend -> trajectories JSONL
//   train-toy        GRPO on the toy policy -> training log and parameters
//   check-gradients  analytic vs finite-difference gradient
//   reward-audit     recompute stored trajectory rewards
//   evaluate         predictions -> metric report
//   report           training log -> CSV series and summary
//   show-config      print the resolved configuration
//
// Exit status: 0 success, 1 a check failed, 2 bad input or configuration,
// 3 any other error.

#ifndef RELJUDGE_CLI_H_
#define RELJUDGE_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace reljudge {

// `args` excludes the program name.
int RunCommand(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err);
int RunCommand(int argc, char** argv);

}  // namespace reljudge

#endif  // RELJUDGE_CLI_H_
