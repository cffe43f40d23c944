// Copyright 2026 The smd Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"

namespace smd::cli {

/// Flags that apply to every subcommand and override the config file.
struct GlobalOptions {
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed_common;
  std::optional<std::uint64_t> seed_private;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

/// Panel parameter values of a bundled figure: delta for fig1, eta for fig2
/// and fig3, gamma for fig4.
std::vector<double> figure_panels(std::string_view figure);

/// Bundled configuration of one panel.
ExperimentConfig figure_config(std::string_view figure, double panel);

inline constexpr double kFig4BurnIn = 5.0;

int cmd_run(const std::filesystem::path& config, const GlobalOptions& opts);
int cmd_reproduce(std::string_view figure, const GlobalOptions& opts);
int cmd_sweep(const std::filesystem::path& config, const GlobalOptions& opts);
int cmd_chaos(const std::filesystem::path& config, const GlobalOptions& opts);
int cmd_lyapunov(const std::filesystem::path& config, const GlobalOptions& opts);

/// Parses argv, dispatches, and maps errors to exit codes
/// (2: configuration, 3: I/O, 1: anything else).
int run_main(int argc, char** argv);

}  // namespace smd::cli
