/*
   Copyright 2026 The Chainfab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace chainfab::cli {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;  // bad flags, rejected transaction, failed invariants
constexpr int kExitIo = 2;     // unreadable files, unreachable node

// args excludes the program name.
int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err);

// Ends a blocking `node run`. Async-signal-safe.
void request_shutdown();

}  // namespace chainfab::cli
