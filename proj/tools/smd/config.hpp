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
#include <vector>

#include <nlohmann/json.hpp>

#include "smd/drivers.hpp"
#include "smd/dynamics.hpp"
#include "smd/errors.hpp"
#include "smd/observables.hpp"
#include "smd/simulator.hpp"

namespace smd::cli {

/// Unreadable input or unwritable output.
class IoError : public Error {
 public:
  using Error::Error;
};

struct ObservableSpec {
  std::string name = "second_moment_1d";
  int dim = 1;
};

/// name: brownian | bessel | mean_variance. delta is ignored by brownian.
struct DriverSpec {
  std::string name = "bessel";
  double delta = 3.0;
};

/// confining: none | double_well | quadratic_well;  interaction: none | quadratic.
struct DynamicsSpec {
  std::string confining = "none";
  std::string interaction = "none";
  double interaction_strength = 1.0;
  double sigma_tilde = 0.0;
};

struct SweepSpec {
  std::uint64_t seed_first = 1;
  std::int64_t seed_count = 0;
  std::vector<double> gamma;
  std::vector<double> delta;
  std::vector<double> eta;
  double burn_in = 0.0;
};

struct ChaosSpec {
  std::vector<std::int64_t> n_particles;
  std::int64_t replicates = 10;
  double order = 2.0;
  std::int64_t snapshot_stride = 50;
};

struct LyapunovOptions {
  std::string v = "auto";  // auto | bessel | mean_variance | quadratic
  std::optional<double> q;
  int levels = 3;
  double lo = 1e-3;
  double hi = 1e3;
  int per_decade = 20;
  double z1_max = 2.0;
  int z1_points = 21;
  std::optional<double> bound;  // C
};

struct OutputSpec {
  std::string dir = "smd_out";
  std::string name = "run";
};

struct ExperimentConfig {
  ObservableSpec observable;
  DriverSpec driver;
  DynamicsSpec dynamics;
  SimConfig sim;
  std::optional<SweepSpec> sweep;
  std::optional<ChaosSpec> chaos;
  std::optional<LyapunovOptions> lyapunov;
  OutputSpec output;
};

/// Throws ConfigError whose message starts with the offending field path.
ExperimentConfig parse_config(const nlohmann::json& j);

/// Every field written out, defaults included. parse_config(to_json(c))
/// reproduces c.
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Reads a config file. A metadata file written by `smd run` is accepted as
/// well; its "config" member is used.
ExperimentConfig load_config(const std::filesystem::path& path);

Observable make_observable(const ObservableSpec& spec);
MomentDriver make_driver(const DriverSpec& spec, int p);
BaselineDynamics make_dynamics(const DynamicsSpec& spec, int d);

/// Builds every component once so errors surface before any run starts.
void validate(const ExperimentConfig& cfg);

}  // namespace smd::cli
