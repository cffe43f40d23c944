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

#include "output.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <system_error>

#include <unistd.h>

#include "config.hpp"
#include "smd/version.hpp"

namespace smd::cli {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t";
  for (int k = 1; k <= traj.dim_p; ++k) out += ",z_" + std::to_string(k);
  out += ",mean,m2,var,detG,margin,m_alpha\n";
  for (std::size_t r = 0; r < traj.size(); ++r) {
    out += format_double(traj.times[r]);
    for (int k = 0; k < traj.dim_p; ++k) {
      out += ',';
      out += format_double(traj.z_series[r * static_cast<std::size_t>(traj.dim_p) + k]);
    }
    for (double v : {traj.mean[r], traj.m2[r], traj.var[r], traj.det[r], traj.margin[r],
                     traj.malpha[r]}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json trajectory_metadata(const nlohmann::json& config, const Trajectory& traj,
                                   double wall_time_s) {
  nlohmann::json meta;
  meta["config"] = config;
  meta["exploded"] = traj.exploded;
  meta["explosion_time"] =
      traj.explosion_time ? nlohmann::json(*traj.explosion_time) : nlohmann::json(nullptr);
  meta["explosion_cause"] = traj.explosion_cause
                                ? nlohmann::json(std::string(to_string(*traj.explosion_cause)))
                                : nlohmann::json(nullptr);
  meta["wall_time_s"] = wall_time_s;
  meta["library_version"] = kVersion;
  return meta;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'" +
                  (ec ? ": " + ec.message() : std::string()));
  }
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw IoError("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw IoError("cannot move output into place at '" + path.string() + "': " + ec.message());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_atomic(path, j.dump(2) + "\n");
}

}  // namespace smd::cli
