// Copyright 2026 The PeRFICS Harness Authors.
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

#ifndef PERFICS_CLI_HPP_
#define PERFICS_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace perfics {

// Entry point of the perfics command. Returns the process exit status:
// 0 on success, 1 on a typed failure, 2 on a usage error.
int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

}  // namespace perfics

#endif  // PERFICS_CLI_HPP_
