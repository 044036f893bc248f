/*
 * Copyright 2026 The sttsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file cli.hpp
 * @brief The stt_sim command line: subcommands, config resolution and run
 *        manifests.
 *
 * Config values resolve as flag > --set override > config file > built-in
 * default. Every run writes manifest.json next to its data files; the
 * manifest holds the fully resolved config, so `stt_sim --manifest <file>`
 * repeats the run and reproduces the data files byte for byte.
 */

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

namespace sttsim::cli {

inline constexpr std::string_view kToolName = "stt_sim";
inline constexpr std::string_view kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kConfigFailure = 1, kRuntimeFailure = 2 };

/// Entry point behind the stt_sim binary; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sttsim::cli
