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

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "smd/simulator.hpp"

namespace smd::cli {

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

/// Header `t,z_1..z_p,mean,m2,var,detG,margin,m_alpha`, one row per record.
std::string trajectory_csv(const Trajectory& traj);

/// {config, exploded, explosion_time, explosion_cause, wall_time_s, library_version}
nlohmann::json trajectory_metadata(const nlohmann::json& config, const Trajectory& traj,
                                   double wall_time_s);

/// Creates the directory (and parents). IoError on failure.
void ensure_directory(const std::filesystem::path& dir);

/// Writes to a temporary sibling and renames it over `path`. IoError on failure.
void write_atomic(const std::filesystem::path& path, std::string_view content);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace smd::cli
