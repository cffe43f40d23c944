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

#include "config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace smd::cli {

using nlohmann::json;

namespace {

// Field access with path-qualified errors and rejection of unknown keys.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
  }

  std::string at(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    if (!has(key)) fail(at(key), "required field is missing");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }
  // null or absent maps to +inf
  double number_or_inf(const std::string& key, double fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (j_.at(key).is_null()) return std::numeric_limits<double>::infinity();
    return number(key);
  }

  std::int64_t integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    return has(key) ? integer(key) : fallback;
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    fail(at(key), "expected a non-negative integer");
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    if (!has(key)) return {};
    const json& v = j_.at(key);
    if (!v.is_array()) fail(at(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(at(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::vector<std::int64_t> integers(const std::string& key) {
    if (!has(key)) return {};
    const json& v = j_.at(key);
    if (!v.is_array()) fail(at(key), "expected an array of integers");
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) {
        fail(at(key) + "[" + std::to_string(i) + "]", "expected an integer");
      }
      out.push_back(v[i].get<std::int64_t>());
    }
    return out;
  }

  Reader child(const std::string& key) { return {raw(key), at(key)}; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) fail(at(item.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
void with_prefix(const std::string& prefix, F&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + "." + e.what());
  }
}

json inf_as_null(double v) { return std::isinf(v) ? json(nullptr) : json(v); }

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  Reader top(j, "");

  {
    Reader r = top.child("observable");
    cfg.observable.name = r.string("name", cfg.observable.name);
    cfg.observable.dim = static_cast<int>(r.integer("dim", 1));
    r.finish();
  }
  {
    Reader r = top.child("driver");
    cfg.driver.name = r.string("name", cfg.driver.name);
    cfg.driver.delta = r.number("delta", cfg.driver.delta);
    r.finish();
  }
  if (top.has("dynamics")) {
    Reader r = top.child("dynamics");
    cfg.dynamics.confining = r.string("confining", "none");
    cfg.dynamics.interaction = r.string("interaction", "none");
    cfg.dynamics.interaction_strength = r.number("interaction_strength", 1.0);
    cfg.dynamics.sigma_tilde = r.number("sigma_tilde", 0.0);
    r.finish();
  }
  {
    Reader r = top.child("sim");
    SimConfig& s = cfg.sim;
    s.n_particles = r.integer("n_particles");
    s.dt = r.number("dt");
    s.t_final = r.number("t_final");
    s.seed_common = r.seed("seed_common", 0);
    s.seed_private = r.seed("seed_private", 0);
    s.eta = r.number("eta", 0.0);
    s.gamma = r.number("gamma", 1.0);
    if (r.has("gamma_mode")) {
      const std::string mode = r.string("gamma_mode", "paper_literal");
      with_prefix("sim", [&] {
        try {
          s.gamma_mode = parse_gamma_mode(mode);
        } catch (const ConfigError& e) {
          throw ConfigError(std::string("gamma_mode: ") + e.what());
        }
      });
    }
    if (r.has("init")) {
      Reader ir = r.child("init");
      const std::string kind = ir.string("kind", "gaussian");
      if (kind == "gaussian") {
        s.init = GaussianInit{ir.number("mean", 0.0), ir.number("std", 1.0)};
      } else if (kind == "samples") {
        s.init = SampleInit{ir.numbers("positions")};
      } else {
        Reader::fail(ir.at("kind"), "expected gaussian or samples");
      }
      ir.finish();
    }
    if (r.has("monitor")) {
      Reader mr = r.child("monitor");
      s.monitor.moment_cap = mr.number_or_inf("moment_cap", s.monitor.moment_cap);
      s.monitor.margin_floor = mr.number("margin_floor", s.monitor.margin_floor);
      s.monitor.det_floor = mr.number("det_floor", s.monitor.det_floor);
      mr.finish();
    }
    s.record_stride = r.integer("record_stride", 1);
    s.snapshot_stride = r.integer("snapshot_stride", 0);
    r.finish();
  }
  if (top.has("sweep")) {
    Reader r = top.child("sweep");
    SweepSpec sw;
    if (r.has("seeds")) {
      Reader sr = r.child("seeds");
      sw.seed_first = sr.seed("first", 1);
      sw.seed_count = sr.integer("count");
      sr.finish();
    }
    sw.gamma = r.numbers("gamma");
    sw.delta = r.numbers("delta");
    sw.eta = r.numbers("eta");
    sw.burn_in = r.number("burn_in", 0.0);
    r.finish();
    cfg.sweep = sw;
  }
  if (top.has("chaos")) {
    Reader r = top.child("chaos");
    ChaosSpec ch;
    ch.n_particles = r.integers("n_particles");
    ch.replicates = r.integer("replicates", ch.replicates);
    ch.order = r.number("p", ch.order);
    ch.snapshot_stride = r.integer("snapshot_stride", ch.snapshot_stride);
    r.finish();
    cfg.chaos = ch;
  }
  if (top.has("lyapunov")) {
    Reader r = top.child("lyapunov");
    LyapunovOptions ly;
    ly.v = r.string("v", ly.v);
    if (r.has("q")) ly.q = r.number("q");
    ly.levels = static_cast<int>(r.integer("levels", ly.levels));
    ly.lo = r.number("lo", ly.lo);
    ly.hi = r.number("hi", ly.hi);
    ly.per_decade = static_cast<int>(r.integer("per_decade", ly.per_decade));
    ly.z1_max = r.number("z1_max", ly.z1_max);
    ly.z1_points = static_cast<int>(r.integer("z1_points", ly.z1_points));
    if (r.has("C")) ly.bound = r.number("C");
    r.finish();
    cfg.lyapunov = ly;
  }
  if (top.has("output")) {
    Reader r = top.child("output");
    cfg.output.dir = r.string("dir", cfg.output.dir);
    cfg.output.name = r.string("name", cfg.output.name);
    r.finish();
  }
  top.finish();
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["observable"] = {{"name", cfg.observable.name}, {"dim", cfg.observable.dim}};
  j["driver"] = {{"name", cfg.driver.name}, {"delta", cfg.driver.delta}};
  j["dynamics"] = {{"confining", cfg.dynamics.confining},
                   {"interaction", cfg.dynamics.interaction},
                   {"interaction_strength", cfg.dynamics.interaction_strength},
                   {"sigma_tilde", cfg.dynamics.sigma_tilde}};
  const SimConfig& s = cfg.sim;
  json init;
  if (const auto* g = std::get_if<GaussianInit>(&s.init)) {
    init = {{"kind", "gaussian"}, {"mean", g->mean}, {"std", g->std}};
  } else {
    init = {{"kind", "samples"}, {"positions", std::get<SampleInit>(s.init).positions}};
  }
  j["sim"] = {{"n_particles", s.n_particles},
              {"dt", s.dt},
              {"t_final", s.t_final},
              {"seed_common", s.seed_common},
              {"seed_private", s.seed_private},
              {"eta", s.eta},
              {"gamma", s.gamma},
              {"gamma_mode", std::string(to_string(s.gamma_mode))},
              {"init", init},
              {"monitor",
               {{"moment_cap", inf_as_null(s.monitor.moment_cap)},
                {"margin_floor", s.monitor.margin_floor},
                {"det_floor", s.monitor.det_floor}}},
              {"record_stride", s.record_stride},
              {"snapshot_stride", s.snapshot_stride}};
  if (cfg.sweep) {
    const SweepSpec& sw = *cfg.sweep;
    j["sweep"] = {{"seeds", {{"first", sw.seed_first}, {"count", sw.seed_count}}},
                  {"gamma", sw.gamma},
                  {"delta", sw.delta},
                  {"eta", sw.eta},
                  {"burn_in", sw.burn_in}};
  }
  if (cfg.chaos) {
    const ChaosSpec& ch = *cfg.chaos;
    j["chaos"] = {{"n_particles", ch.n_particles},
                  {"replicates", ch.replicates},
                  {"p", ch.order},
                  {"snapshot_stride", ch.snapshot_stride}};
  }
  if (cfg.lyapunov) {
    const LyapunovOptions& ly = *cfg.lyapunov;
    json l = {{"v", ly.v},         {"levels", ly.levels},       {"lo", ly.lo},
              {"hi", ly.hi},       {"per_decade", ly.per_decade}, {"z1_max", ly.z1_max},
              {"z1_points", ly.z1_points}};
    if (ly.q) l["q"] = *ly.q;
    if (ly.bound) l["C"] = *ly.bound;
    j["lyapunov"] = l;
  }
  j["output"] = {{"dir", cfg.output.dir}, {"name", cfg.output.name}};
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": malformed JSON: " + e.what());
  }
  if (j.is_object() && j.contains("config") && j.contains("library_version")) {
    return parse_config(j.at("config"));
  }
  return parse_config(j);
}

Observable make_observable(const ObservableSpec& spec) {
  if (spec.dim < 1) throw ConfigError("observable.dim: must be >= 1");
  try {
    return builtin(spec.name, spec.dim);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("observable.name: ") + e.what());
  }
}

MomentDriver make_driver(const DriverSpec& spec, int p) {
  if (spec.name == "brownian") return brownian(p);
  if (spec.name == "bessel" || spec.name == "mean_variance") {
    if (!(spec.delta > 0.0)) throw ConfigError("driver.delta: must be > 0");
    return spec.name == "bessel" ? bessel(spec.delta) : mean_variance(spec.delta);
  }
  throw ConfigError("driver.name: unknown driver '" + spec.name +
                    "' (expected brownian, bessel or mean_variance)");
}

BaselineDynamics make_dynamics(const DynamicsSpec& spec, int d) {
  if (!(spec.sigma_tilde >= 0.0)) throw ConfigError("dynamics.sigma_tilde: must be >= 0");
  Potentials pot;
  if (spec.confining == "double_well") {
    if (d != 1) throw ConfigError("dynamics.confining: double_well needs d = 1");
    pot.grad_confining = builtin_double_well().grad_confining;
  } else if (spec.confining == "quadratic_well") {
    pot.grad_confining = [](std::span<const double> x, std::span<double> out) {
      for (std::size_t c = 0; c < x.size(); ++c) out[c] = x[c];
    };
  } else if (spec.confining != "none") {
    throw ConfigError("dynamics.confining: unknown potential '" + spec.confining +
                      "' (expected none, double_well or quadratic_well)");
  }
  if (spec.interaction == "quadratic") {
    if (!std::isfinite(spec.interaction_strength)) {
      throw ConfigError("dynamics.interaction_strength: must be finite");
    }
    pot.interaction = InteractionKind::Quadratic;
    pot.interaction_strength = spec.interaction_strength;
  } else if (spec.interaction != "none") {
    throw ConfigError("dynamics.interaction: unknown interaction '" + spec.interaction +
                      "' (expected none or quadratic)");
  }
  return BaselineDynamics::granular_media(d, std::move(pot), spec.sigma_tilde);
}

void validate(const ExperimentConfig& cfg) {
  const Observable obs = make_observable(cfg.observable);
  const MomentDriver drv = make_driver(cfg.driver, obs.dim_p());
  if (drv.dim_p() != obs.dim_p()) {
    throw ConfigError("driver.name: driver '" + cfg.driver.name + "' has p = " +
                      std::to_string(drv.dim_p()) + " but observable '" + cfg.observable.name +
                      "' has p = " + std::to_string(obs.dim_p()));
  }
  make_dynamics(cfg.dynamics, obs.dim_d());
  with_prefix("sim", [&] {
    cfg.sim.validate();
    if (const auto* s = std::get_if<SampleInit>(&cfg.sim.init)) {
      const auto want = static_cast<std::size_t>(cfg.sim.n_particles) *
                        static_cast<std::size_t>(obs.dim_d());
      if (s->positions.size() != want) {
        throw ConfigError("init.positions: expected " + std::to_string(want) + " values");
      }
    }
  });
  if (cfg.output.name.empty()) throw ConfigError("output.name: must not be empty");
}

}  // namespace smd::cli
