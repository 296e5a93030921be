/*
 Copyright 2026 The hvacctl Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "hvac/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "hvac/csv.hpp"
#include "hvac/errors.hpp"

namespace hvac {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so that
// misspelled keys surface as errors instead of silently keeping defaults.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be a JSON object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& raw(const char* key) {
    seen_.insert(key);
    static const json kEmpty = json::object();
    const auto it = j_.find(key);
    return it == j_.end() ? kEmpty : *it;
  }

  Section child(const char* key) { return Section(raw(key), where_ + "." + key); }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError("unknown configuration key " + where_ + "." + item.key());
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string fault_kind_name(FaultKind k) { return k == FaultKind::kCommandDrop ? "command-drop" : "sensor-gap"; }

FaultKind fault_kind_from(const std::string& s) {
  if (s == "command-drop") return FaultKind::kCommandDrop;
  if (s == "sensor-gap") return FaultKind::kSensorGap;
  throw ConfigError("unknown fault kind '" + s + "' (expected command-drop or sensor-gap)");
}

std::string target_source_name(TargetSource t) { return t == TargetSource::kSchedule ? "schedule" : "logged"; }

TargetSource target_source_from(const std::string& s) {
  if (s == "schedule") return TargetSource::kSchedule;
  if (s == "logged") return TargetSource::kLoggedSetpoint;
  throw ConfigError("unknown target source '" + s + "' (expected schedule or logged)");
}

json params_json(const PhysicalParams& p) {
  return {{"capacitance_j_per_degc", capacitance_to_joules(p.capacitance)},
          {"r_mass_degc_per_kw", p.r_mass},
          {"r_out_degc_per_kw", p.r_out},
          {"t_mass_degc", p.t_mass},
          {"eta_backup", p.eta_backup},
          {"a_eff_m2", p.a_eff}};
}

void read_params(Section s, PhysicalParams& p) {
  double joules = capacitance_to_joules(p.capacitance);
  s.read("capacitance_j_per_degc", joules);
  p.capacitance = capacitance_from_joules(joules);
  s.read("r_mass_degc_per_kw", p.r_mass);
  s.read("r_out_degc_per_kw", p.r_out);
  s.read("t_mass_degc", p.t_mass);
  s.read("eta_backup", p.eta_backup);
  s.read("a_eff_m2", p.a_eff);
  s.finish();
}

json weights_json(const EconomicWeights& w) { return {{"w_d", w.w_d}, {"w_e", w.w_e}, {"w_c", w.w_c}}; }

void read_weights(Section s, EconomicWeights& w) {
  s.read("w_d", w.w_d);
  s.read("w_e", w.w_e);
  s.read("w_c", w.w_c);
  s.finish();
}

json comfort_json(const ComfortAssumptions& c) {
  return {{"met", c.met},
          {"clo", c.clo},
          {"air_velocity", c.air_velocity},
          {"rh", c.rh},
          {"mrt_equals_air", c.mrt_equals_air},
          {"mrt", c.mrt}};
}

void read_comfort(Section s, ComfortAssumptions& c) {
  s.read("met", c.met);
  s.read("clo", c.clo);
  s.read("air_velocity", c.air_velocity);
  s.read("rh", c.rh);
  s.read("mrt_equals_air", c.mrt_equals_air);
  s.read("mrt", c.mrt);
  s.finish();
}

json weather_json(const WeatherSource& w) {
  return {{"kind", w.kind}, {"path", w.path}, {"days", w.days}, {"seed", w.seed}, {"preset", w.preset}};
}

void read_weather(Section s, WeatherSource& w) {
  s.read("kind", w.kind);
  s.read("path", w.path);
  s.read("days", w.days);
  s.read("seed", w.seed);
  s.read("preset", w.preset);
  s.finish();
}

json hyper_json(const IbexHyper& h) {
  return {{"alpha_imit", h.alpha_imit}, {"alpha_state", h.alpha_state}, {"alpha_cost", h.alpha_cost},
          {"lambda", h.lambda},         {"batch_m", h.batch_m},         {"epochs", h.epochs},
          {"fixed_w_c", h.fixed_w_c},   {"state_passes", h.state_passes},
          {"online_optimizer", to_string(h.online_optimizer)}};
}

void read_hyper(Section s, IbexHyper& h) {
  s.read("alpha_imit", h.alpha_imit);
  s.read("alpha_state", h.alpha_state);
  s.read("alpha_cost", h.alpha_cost);
  s.read("lambda", h.lambda);
  s.read("batch_m", h.batch_m);
  s.read("epochs", h.epochs);
  s.read("fixed_w_c", h.fixed_w_c);
  s.read("state_passes", h.state_passes);
  std::string opt = to_string(h.online_optimizer);
  s.read("online_optimizer", opt);
  h.online_optimizer = online_optimizer_from_string(opt);
  s.finish();
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["format_version"] = kConfigFormatVersion;
  j["seed"] = c.seed;
  json sched = json::array();
  for (const auto& [h, t] : c.schedule.entries) sched.push_back({h, t});
  j["site"] = {{"utc_offset_hours", c.utc_offset_hours},
               {"schedule", sched},
               {"bounds", {{"p_hp_kw", {c.bounds.lo[0], c.bounds.hi[0]}}, {"p_bh_kw", {c.bounds.lo[1], c.bounds.hi[1]}}}}};
  const auto& p = c.plant;
  j["plant"] = {{"true_params", params_json(p.true_params)},
                {"cop", {{"c0", p.cop.c0}, {"c1", p.cop.c1}, {"floor", p.cop.floor}}},
                {"return_offset", p.return_offset},
                {"return_sigma", p.return_sigma},
                {"local_offset", p.local_offset},
                {"local_sigma", p.local_sigma},
                {"local_resolution", p.local_resolution},
                {"deadband", p.deadband},
                {"stage2_gap", p.stage2_gap},
                {"hp_capacity_kw", p.hp_capacity},
                {"bh_capacity_kw", p.bh_capacity},
                {"substep_seconds", p.substep_seconds},
                {"internal_gain_kw", p.internal_gain},
                {"gain_start_hour", p.gain_start},
                {"gain_end_hour", p.gain_end},
                {"initial_temp", p.initial_temp}};
  j["controller"] = c.controller;
  j["baseline_setpoint"] = c.baseline_setpoint;
  j["deploy_days"] = c.deploy_days;
  j["weather"] = weather_json(c.weather);
  json windows = json::array();
  for (const auto& w : c.faults.windows)
    windows.push_back({{"start", format_rfc3339(w.start)}, {"end", format_rfc3339(w.end)}, {"kind", fault_kind_name(w.kind)}});
  j["faults"] = {{"preset", c.faults.preset}, {"windows", windows}};
  j["history"] = {{"days", c.history.days},
                  {"dither_degc", c.history.dither},
                  {"block_hours", c.history.block},
                  {"weather", weather_json(c.history.weather)}};
  const auto& id = c.identify;
  j["identify"] = {{"min_days", c.identify_min_days},  {"rm_lo", id.rm_lo},
                   {"rm_hi", id.rm_hi},                {"rm_step", id.rm_step},
                   {"refinements", id.refinements},    {"outer_iterations", id.outer_iterations},
                   {"steady_threshold", id.steady_threshold}, {"kernel_lambda", id.kernel_lambda},
                   {"joint_span", id.joint_span}};
  const auto& t = c.mpc.tuning;
  j["mpc"] = {{"weights", weights_json(c.mpc.weights)},
              {"retune_hours", c.mpc.retune_hours},
              {"tuning",
               {{"candidates", t.candidates},
                {"ppd_target", t.ppd_target},
                {"day_scale", t.day_scale},
                {"night_scale", t.night_scale},
                {"day_start", t.day_start},
                {"day_end", t.day_end},
                {"comfort", comfort_json(t.comfort)}}}};
  const auto& r = c.rl;
  j["rl"] = {{"hyper", hyper_json(r.hyper)},
             {"grid_alpha_imit", r.grid_alpha},
             {"grid_lambda", r.grid_lambda},
             {"init_state", params_json(r.init_state)},
             {"init_cost", {{"o_state", r.init_cost.o_state}, {"r_hp", r.init_cost.r_hp}, {"r_bh", r.init_cost.r_bh}}},
             {"init_t_mass_from_history", r.init_t_mass_from_history},
             {"targets", target_source_name(r.targets)},
             {"holdout_days", r.holdout_days},
             {"learn_state", r.learn_state},
             {"learn_cost", r.learn_cost},
             {"weights", weights_json(r.weights)},
             {"solver", {{"tolerance", r.solver.tolerance}, {"max_iterations", r.solver.max_iterations}}},
             {"divergence_limit", r.divergence_limit}};
  const auto& a = c.analysis;
  j["analysis"] = {{"outdoor_interval", a.outdoor_interval},
                   {"delta_interval", a.delta_interval},
                   {"mc_samples", a.mc_samples},
                   {"auc_step", a.auc_step},
                   {"curve_step", a.curve_step},
                   {"min_operating_hours", a.min_operating_hours},
                   {"comfort", comfort_json(a.comfort)},
                   {"day_start", a.day_start},
                   {"day_end", a.day_end}};
  j["output_dir"] = c.output_dir;
  return j;
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  c.base_dir = base_dir;
  Section root(j, "config");
  int version = 0;
  root.read("format_version", version);
  if (version != kConfigFormatVersion)
    throw ConfigError("unsupported config format_version " + std::to_string(version) + " (expected " +
                      std::to_string(kConfigFormatVersion) + ")");
  root.read("seed", c.seed);
  {
    auto s = root.child("site");
    s.read("utc_offset_hours", c.utc_offset_hours);
    if (s.has("schedule")) {
      std::vector<std::pair<int, double>> entries;
      s.read("schedule", entries);
      c.schedule.entries = entries;
    }
    auto b = s.child("bounds");
    std::array<double, 2> hp{c.bounds.lo[0], c.bounds.hi[0]};
    std::array<double, 2> bh{c.bounds.lo[1], c.bounds.hi[1]};
    b.read("p_hp_kw", hp);
    b.read("p_bh_kw", bh);
    b.finish();
    c.bounds = {{hp[0], bh[0]}, {hp[1], bh[1]}};
    s.finish();
  }
  {
    auto s = root.child("plant");
    auto& p = c.plant;
    read_params(s.child("true_params"), p.true_params);
    auto cop = s.child("cop");
    cop.read("c0", p.cop.c0);
    cop.read("c1", p.cop.c1);
    cop.read("floor", p.cop.floor);
    cop.finish();
    s.read("return_offset", p.return_offset);
    s.read("return_sigma", p.return_sigma);
    s.read("local_offset", p.local_offset);
    s.read("local_sigma", p.local_sigma);
    s.read("local_resolution", p.local_resolution);
    s.read("deadband", p.deadband);
    s.read("stage2_gap", p.stage2_gap);
    s.read("hp_capacity_kw", p.hp_capacity);
    s.read("bh_capacity_kw", p.bh_capacity);
    s.read("substep_seconds", p.substep_seconds);
    s.read("internal_gain_kw", p.internal_gain);
    s.read("gain_start_hour", p.gain_start);
    s.read("gain_end_hour", p.gain_end);
    s.read("initial_temp", p.initial_temp);
    s.finish();
  }
  root.read("controller", c.controller);
  root.read("baseline_setpoint", c.baseline_setpoint);
  root.read("deploy_days", c.deploy_days);
  read_weather(root.child("weather"), c.weather);
  {
    auto s = root.child("faults");
    s.read("preset", c.faults.preset);
    const auto& windows = s.raw("windows");
    if (!windows.is_null() && !(windows.is_object() && windows.empty())) {
      if (!windows.is_array()) throw ConfigError("config.faults.windows must be an array");
      for (std::size_t i = 0; i < windows.size(); ++i) {
        Section w(windows[i], "config.faults.windows[" + std::to_string(i) + "]");
        std::string start, end, kind;
        w.read("start", start);
        w.read("end", end);
        w.read("kind", kind);
        w.finish();
        try {
          c.faults.windows.push_back({parse_rfc3339(start), parse_rfc3339(end), fault_kind_from(kind)});
        } catch (const DataError& e) {
          throw ConfigError("config.faults.windows[" + std::to_string(i) + "]: " + e.what());
        }
      }
    }
    s.finish();
  }
  {
    auto s = root.child("history");
    s.read("days", c.history.days);
    s.read("dither_degc", c.history.dither);
    s.read("block_hours", c.history.block);
    read_weather(s.child("weather"), c.history.weather);
    s.finish();
  }
  {
    auto s = root.child("identify");
    auto& id = c.identify;
    s.read("min_days", c.identify_min_days);
    s.read("rm_lo", id.rm_lo);
    s.read("rm_hi", id.rm_hi);
    s.read("rm_step", id.rm_step);
    s.read("refinements", id.refinements);
    s.read("outer_iterations", id.outer_iterations);
    s.read("steady_threshold", id.steady_threshold);
    s.read("kernel_lambda", id.kernel_lambda);
    s.read("joint_span", id.joint_span);
    s.finish();
  }
  {
    auto s = root.child("mpc");
    read_weights(s.child("weights"), c.mpc.weights);
    s.read("retune_hours", c.mpc.retune_hours);
    auto t = s.child("tuning");
    auto& tu = c.mpc.tuning;
    t.read("candidates", tu.candidates);
    t.read("ppd_target", tu.ppd_target);
    t.read("day_scale", tu.day_scale);
    t.read("night_scale", tu.night_scale);
    t.read("day_start", tu.day_start);
    t.read("day_end", tu.day_end);
    read_comfort(t.child("comfort"), tu.comfort);
    t.finish();
    s.finish();
  }
  {
    auto s = root.child("rl");
    auto& r = c.rl;
    read_hyper(s.child("hyper"), r.hyper);
    s.read("grid_alpha_imit", r.grid_alpha);
    s.read("grid_lambda", r.grid_lambda);
    read_params(s.child("init_state"), r.init_state);
    auto ic = s.child("init_cost");
    ic.read("o_state", r.init_cost.o_state);
    ic.read("r_hp", r.init_cost.r_hp);
    ic.read("r_bh", r.init_cost.r_bh);
    ic.finish();
    s.read("init_t_mass_from_history", r.init_t_mass_from_history);
    std::string targets = target_source_name(r.targets);
    s.read("targets", targets);
    r.targets = target_source_from(targets);
    s.read("holdout_days", r.holdout_days);
    s.read("learn_state", r.learn_state);
    s.read("learn_cost", r.learn_cost);
    read_weights(s.child("weights"), r.weights);
    auto sv = s.child("solver");
    sv.read("tolerance", r.solver.tolerance);
    sv.read("max_iterations", r.solver.max_iterations);
    sv.finish();
    s.read("divergence_limit", r.divergence_limit);
    s.finish();
  }
  {
    auto s = root.child("analysis");
    auto& a = c.analysis;
    s.read("outdoor_interval", a.outdoor_interval);
    s.read("delta_interval", a.delta_interval);
    s.read("mc_samples", a.mc_samples);
    s.read("auc_step", a.auc_step);
    s.read("curve_step", a.curve_step);
    s.read("min_operating_hours", a.min_operating_hours);
    read_comfort(s.child("comfort"), a.comfort);
    s.read("day_start", a.day_start);
    s.read("day_end", a.day_end);
    s.finish();
  }
  root.read("output_dir", c.output_dir);
  root.finish();
  return c;
}

void validate_weather_source(const ExperimentConfig& c, const WeatherSource& w, const std::string& where) {
  if (w.kind == "synthetic") {
    if (w.days < 1) throw ConfigError(where + ".days must be at least 1");
    (void)climate_preset(w.preset);
  } else if (w.kind == "file") {
    const auto path = resolve_path(c, w.path);
    if (w.path.empty() || !std::filesystem::exists(path))
      throw ConfigError(where + ".path does not exist: " + path.string());
  } else {
    throw ConfigError(where + ".kind must be synthetic or file, got '" + w.kind + "'");
  }
}

std::string utc_now() {
  return format_rfc3339(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Starts a manifest and writes the materialized config next to the outputs.
RunManifest begin_run(const ExperimentConfig& config, const std::string& command, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  const std::string text = serialize_config(config);
  write_file_atomic(out / "config.json", text);
  RunManifest m;
  m.command = command;
  m.config_sha256 = sha256_hex(text);
  m.started_at = utc_now();
  m.versions = {{"hvacctl", kToolVersion},
                {"config_format", std::to_string(kConfigFormatVersion)},
                {"manifest_format", std::to_string(kManifestFormatVersion)},
                {"model_format", std::to_string(kModelFormatVersion)},
                {"rl_checkpoint_format", std::to_string(kCheckpointFormatVersion)}};
  m.seeds["master"] = config.seed;
  m.files.push_back("config.json");
  return m;
}

void finish_run(RunManifest& m, const ExperimentConfig& config, const std::filesystem::path& out, const Stopwatch& sw) {
  m.files.push_back("manifest.json");
  std::sort(m.files.begin(), m.files.end());
  m.wall_clock_seconds = sw.seconds();
  write_manifest(out / "manifest.json", m, config);
}

void write_json(const std::filesystem::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

double history_span_days(const InteractionLog& log) {
  if (log.empty()) return 0.0;
  const auto span = log.back().time - log.front().time + std::chrono::hours{1};
  return std::chrono::duration<double>(span).count() / 86400.0;
}

void require_history(const ExperimentConfig& config, const InteractionLog& log) {
  const double days = history_span_days(log);
  if (days + 1e-9 < config.identify_min_days) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "insufficient history: %.2f days, need at least %d", days, config.identify_min_days);
    throw DataError(buf);
  }
}

FaultSchedule build_faults(const ExperimentConfig& config, const std::vector<WeatherPoint>& weather, int hours) {
  if (config.faults.preset == "custom") {
    FaultSchedule fs;
    fs.windows = config.faults.windows;
    return fs;
  }
  return fault_preset(config.faults.preset, weather.front().time, hours);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  clock();
  schedule.validate();
  bounds.validate();
  plant.validate();
  if (bounds.lo[0] < 0.0 || bounds.lo[1] < 0.0) throw ConfigError("input bounds must be non-negative");
  if (bounds.hi[0] > plant.hp_capacity + 1e-12)
    throw ConfigError("heat-pump bound exceeds the plant capacity of " + fmt("%g", plant.hp_capacity) + " kW");
  if (bounds.hi[1] > plant.bh_capacity + 1e-12)
    throw ConfigError("backup bound exceeds the plant capacity of " + fmt("%g", plant.bh_capacity) + " kW");
  if (utc_offset_hours < -12 || utc_offset_hours > 14) throw ConfigError("utc_offset_hours outside [-12, 14]");
  static const std::set<std::string> kinds{"baseline", "history", "mpc", "rl"};
  if (!kinds.count(controller)) throw ConfigError("controller must be baseline, history, mpc or rl; got '" + controller + "'");
  if (!(baseline_setpoint >= 10.0 && baseline_setpoint <= 30.0)) throw ConfigError("baseline_setpoint outside [10, 30] degC");
  if (deploy_days < 1) throw ConfigError("deploy_days must be at least 1");
  validate_weather_source(*this, weather, "weather");
  validate_weather_source(*this, history.weather, "history.weather");
  if (history.days < 1) throw ConfigError("history.days must be at least 1");
  if (!(history.dither >= 0.0)) throw ConfigError("history.dither_degc must be non-negative");
  if (history.block < 1) throw ConfigError("history.block_hours must be at least 1");
  if (faults.preset == "custom") {
    FaultSchedule fs;
    fs.windows = faults.windows;
    fs.validate();
  } else if (faults.preset != "none" && faults.preset != "interruptions") {
    throw ConfigError("faults.preset must be none, interruptions or custom; got '" + faults.preset + "'");
  } else if (!faults.windows.empty()) {
    throw ConfigError("faults.windows are only read with preset custom");
  }
  if (identify_min_days < 1) throw ConfigError("identify.min_days must be at least 1");
  mpc.weights.validate();
  mpc.tuning.comfort.validate();
  if (mpc.tuning.candidates.empty()) throw ConfigError("mpc.tuning.candidates is empty");
  if (mpc.retune_hours < 1) throw ConfigError("mpc.retune_hours must be at least 1");
  rl.hyper.validate();
  rl.init_state.validate();
  rl.init_cost.validate();
  rl.weights.validate();
  if (rl.grid_alpha.empty() || rl.grid_lambda.empty()) throw ConfigError("rl grid needs at least one alpha and one lambda");
  for (double a : rl.grid_alpha)
    if (!(a > 0.0)) throw ConfigError("rl.grid_alpha_imit values must be positive");
  for (double l : rl.grid_lambda)
    if (!(l >= 0.0)) throw ConfigError("rl.grid_lambda values must be non-negative");
  if (rl.holdout_days < 0) throw ConfigError("rl.holdout_days must be non-negative");
  if (!(rl.divergence_limit > 0.0)) throw ConfigError("rl.divergence_limit must be positive");
  const auto& a = analysis;
  if (!(a.outdoor_interval[0] < a.outdoor_interval[1]) || !(a.delta_interval[0] < a.delta_interval[1]))
    throw ConfigError("analysis intervals must satisfy lo < hi");
  if (a.mc_samples < 1) throw ConfigError("analysis.mc_samples must be at least 1");
  if (!(a.auc_step > 0.0) || !(a.curve_step > 0.0)) throw ConfigError("analysis steps must be positive");
  if (a.min_operating_hours < 0 || a.min_operating_hours > 24) throw ConfigError("min_operating_hours outside [0, 24]");
  a.comfort.validate();
  if (a.day_start < 0 || a.day_end > 24 || a.day_start >= a.day_end) throw ConfigError("analysis day window invalid");
  if (output_dir.empty()) throw ConfigError("output_dir is empty");
}

std::string serialize_config(const ExperimentConfig& config) { return config_json(config).dump(2) + "\n"; }

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  auto c = config_from_json(j, base_dir);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  try {
    return parse_config(read_file(path), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("SHA-256 computation failed");
  std::string hex;
  hex.reserve(2 * len);
  static constexpr char kHex[] = "0123456789abcdef";
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m, const ExperimentConfig& config) {
  json j;
  j["format_version"] = kManifestFormatVersion;
  j["command"] = m.command;
  j["config_sha256"] = m.config_sha256;
  j["config"] = config_json(config);
  j["seeds"] = m.seeds;
  j["versions"] = m.versions;
  j["files"] = m.files;
  j["metrics"] = m.metrics;
  j["warnings"] = m.warnings;
  j["started_at"] = m.started_at;
  j["wall_clock_seconds"] = m.wall_clock_seconds;
  write_json(path, j);
}

RunManifest read_manifest(const std::filesystem::path& path) {
  RunManifest m;
  try {
    const json j = json::parse(read_file(path));
    if (j.at("format_version").get<int>() != kManifestFormatVersion)
      throw DataError(path.string() + ": unsupported manifest format_version");
    m.command = j.at("command").get<std::string>();
    m.config_sha256 = j.at("config_sha256").get<std::string>();
    m.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
    m.versions = j.at("versions").get<std::map<std::string, std::string>>();
    m.files = j.at("files").get<std::vector<std::string>>();
    m.metrics = j.at("metrics").get<std::map<std::string, double>>();
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    m.started_at = j.at("started_at").get<std::string>();
    m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed manifest: " + e.what());
  }
  return m;
}

std::filesystem::path resolve_path(const ExperimentConfig& config, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() || config.base_dir.empty() ? p : config.base_dir / p;
}

std::filesystem::path default_output_dir(const ExperimentConfig& config, const std::string& leaf) {
  std::filesystem::path root(config.output_dir);
  if (root.is_relative()) {
    if (const char* env = std::getenv(kDataDirEnv); env && *env) root = std::filesystem::path(env) / root;
  }
  return root / leaf;
}

std::vector<WeatherPoint> load_weather_source(const ExperimentConfig& config, const WeatherSource& source) {
  if (source.kind == "file") {
    auto trace = load_weather_csv(resolve_path(config, source.path));
    validate_weather(trace, source.path);
    return trace;
  }
  return synthesize_weather(source.days, source.seed, climate_preset(source.preset), config.clock());
}

void write_model_checkpoint(const std::filesystem::path& path, const ModelCheckpoint& m) {
  const auto s = m.qe.state();
  json qe;
  qe["x"] = s.x;
  qe["alpha"] = s.alpha;
  qe["mean"] = s.mean;
  qe["scale"] = s.scale;
  qe["y_mean"] = s.y_mean;
  qe["gamma"] = s.gamma;
  qe["lambda"] = s.lambda;
  json j;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = "mpc-model";
  j["params"] = params_json(m.params);
  j["cop"] = {{"c0", m.cop.c0}, {"c1", m.cop.c1}, {"floor", m.cop.floor}};
  j["exogenous_gain_model"] = qe;
  j["fit"] = {{"holdout_rmse_degc", m.holdout_rmse}, {"steady_samples", m.steady_samples}, {"fit_samples", m.fit_samples}};
  write_json(path, j);
}

ModelCheckpoint read_model_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("model checkpoint not found: " + path.string());
  ModelCheckpoint m;
  try {
    const json j = json::parse(read_file(path));
    if (j.value("kind", std::string{}) != "mpc-model")
      throw ConfigError(path.string() + " is not an MPC model checkpoint (kind '" + j.value("kind", std::string{}) + "')");
    if (j.at("format_version").get<int>() != kModelFormatVersion)
      throw DataError(path.string() + ": unsupported model format_version");
    read_params(Section(j.at("params"), "params"), m.params);
    const auto& c = j.at("cop");
    m.cop = {c.at("c0").get<double>(), c.at("c1").get<double>(), c.at("floor").get<double>()};
    const auto& q = j.at("exogenous_gain_model");
    ExogenousGainModel::State s;
    s.x = q.at("x").get<std::vector<ExogenousGainModel::Features>>();
    s.alpha = q.at("alpha").get<std::vector<double>>();
    s.mean = q.at("mean").get<ExogenousGainModel::Features>();
    s.scale = q.at("scale").get<ExogenousGainModel::Features>();
    s.y_mean = q.at("y_mean").get<double>();
    s.gamma = q.at("gamma").get<double>();
    s.lambda = q.at("lambda").get<double>();
    m.qe = ExogenousGainModel::from_state(s);
    const auto& f = j.at("fit");
    m.holdout_rmse = f.at("holdout_rmse_degc").get<double>();
    m.steady_samples = f.at("steady_samples").get<int>();
    m.fit_samples = f.at("fit_samples").get<int>();
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed model checkpoint: " + e.what());
  }
  m.params.validate();
  return m;
}

RunData read_run(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "log.csv")) throw DataError("no log.csv in run directory " + dir.string());
  if (!std::filesystem::exists(dir / "weather.csv")) throw DataError("no weather.csv in run directory " + dir.string());
  RunData r{read_log_csv(dir / "log.csv"), load_weather_csv(dir / "weather.csv")};
  validate_weather(r.weather, (dir / "weather.csv").string());
  return r;
}

RunManifest cmd_synth_weather(const ExperimentConfig& config, const std::filesystem::path& out) {
  config.validate();
  const Stopwatch sw;
  auto m = begin_run(config, "synth-weather", out);
  const auto trace = load_weather_source(config, config.weather);
  write_weather_csv(out / "weather.csv", trace);
  m.files.push_back("weather.csv");
  m.seeds["weather"] = config.weather.seed;
  m.metrics["hours"] = static_cast<double>(trace.size());
  finish_run(m, config, out, sw);
  return m;
}

IdentifyResult cmd_identify(const ExperimentConfig& config, const std::filesystem::path& history_dir,
                            const std::filesystem::path& out) {
  config.validate();
  const Stopwatch sw;
  const auto run = read_run(history_dir);
  require_history(config, run.log);
  auto m = begin_run(config, "identify", out);

  const auto samples = log_to_samples(run.log, run.weather, config.clock(), config.plant.cop);
  const auto id = identify_model(samples, config.identify);
  IdentifyResult res;
  res.history_days = history_span_days(run.log);
  res.model = {id.params, config.plant.cop, id.qe, id.holdout_rmse, id.steady_samples, id.fit_samples};
  write_model_checkpoint(out / "model.json", res.model);

  json report = {{"history_days", res.history_days},
                 {"samples", samples.size()},
                 {"steady_samples", id.steady_samples},
                 {"fit_samples", id.fit_samples},
                 {"holdout_rmse_degc", id.holdout_rmse},
                 {"params", params_json(id.params)}};
  write_json(out / "fit_report.json", report);
  m.files.insert(m.files.end(), {"model.json", "fit_report.json"});
  m.metrics = {{"holdout_rmse_degc", id.holdout_rmse},
               {"history_days", res.history_days},
               {"capacitance_kwh_per_degc", id.params.capacitance},
               {"r_mass_degc_per_kw", id.params.r_mass},
               {"r_out_degc_per_kw", id.params.r_out},
               {"t_mass_degc", id.params.t_mass}};
  finish_run(m, config, out, sw);
  res.manifest = m;
  return res;
}

PretrainSummary cmd_pretrain(const ExperimentConfig& config, const std::filesystem::path& history_dir,
                             const std::filesystem::path& out, const std::filesystem::path& init_model, Exec exec) {
  config.validate();
  const Stopwatch sw;
  const auto run = read_run(history_dir);
  require_history(config, run.log);
  const auto& rl = config.rl;

  auto all = log_to_imitation(run.log, run.weather, config.schedule, config.clock(), 24, rl.targets);
  const auto hold = std::min(all.size(), static_cast<std::size_t>(rl.holdout_days) * 24);
  if (hold == all.size()) throw DataError("holdout_days leaves no pretraining samples");
  const std::vector<ImitationSample> train(all.begin(), all.end() - static_cast<std::ptrdiff_t>(hold));
  const std::vector<ImitationSample> held(all.end() - static_cast<std::ptrdiff_t>(hold), all.end());

  PhysicalParams init = rl.init_state;
  if (!init_model.empty()) {
    const auto model = read_model_checkpoint(init_model);
    init.capacitance = model.params.capacitance;
    init.r_mass = model.params.r_mass;
    init.r_out = model.params.r_out;
    init.t_mass = model.params.t_mass;
  } else if (rl.init_t_mass_from_history) {
    double sum = 0.0;
    for (const auto& r : run.log) sum += r.t_return;
    init.t_mass = sum / static_cast<double>(run.log.size());
  }
  const PolicyContext ctx{config.plant.cop, config.bounds, rl.solver};

  PretrainSummary res;
  res.train_samples = train.size();
  res.holdout_samples = held.size();
  for (double a : rl.grid_alpha) {
    for (double l : rl.grid_lambda) {
      GridPoint g;
      g.alpha_imit = a;
      g.lambda = l;
      res.grid.push_back(g);
    }
  }
  std::vector<std::exception_ptr> errors(res.grid.size());
  auto run_point = [&](std::size_t i) {
    auto& g = res.grid[i];
    IbexHyper h = rl.hyper;
    h.alpha_imit = g.alpha_imit;
    h.lambda = g.lambda;
    PretrainOptions opt;
    opt.seed = config.seed;
    opt.exec = Exec::kSerial;
    opt.divergence_limit = rl.divergence_limit;
    try {
      g.result = imitation_pretrain(train, h, init, rl.init_cost, ctx, opt);
    } catch (const NumericalError& e) {
      g.diverged = true;
      g.message = e.what();
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const auto n = static_cast<long>(res.grid.size());
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) run_point(static_cast<std::size_t>(i));
  } else {
    for (long i = 0; i < n; ++i) run_point(static_cast<std::size_t>(i));
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  bool any = false;
  for (std::size_t i = 0; i < res.grid.size(); ++i) {
    const auto& g = res.grid[i];
    if (g.diverged) continue;
    if (!any || g.result.final.action < res.grid[res.selected].result.final.action) res.selected = i;
    any = true;
  }
  if (!any) {
    throw NumericalError("pretraining diverged at every grid point (" + std::to_string(res.grid.size()) +
                         "); first: " + res.grid.front().message);
  }
  const auto& best = res.grid[res.selected];
  if (!held.empty()) res.holdout_action_rms = action_rms(best.result.theta_state, best.result.theta_cost, ctx, held);

  auto m = begin_run(config, "pretrain", out);
  IbexCheckpoint ckpt;
  ckpt.theta_state = best.result.theta_state;
  ckpt.theta_cost = best.result.theta_cost;
  ckpt.hyper = rl.hyper;
  ckpt.hyper.alpha_imit = best.alpha_imit;
  ckpt.hyper.lambda = best.lambda;
  ckpt.loss_history = best.result.epochs;
  ckpt.label = "alpha_imit=" + fmt("%g", best.alpha_imit) + " lambda=" + fmt("%g", best.lambda);
  write_checkpoint(out / "theta.json", ckpt);

  std::ostringstream grid;
  grid << "index,alpha_imit,lambda,status,selected,initial_action,final_state,final_action,final_imitation\n";
  std::ostringstream curves;
  curves << "index,epoch,state,action,imitation\n";
  for (std::size_t i = 0; i < res.grid.size(); ++i) {
    const auto& g = res.grid[i];
    const auto& r = g.result;
    grid << i << ',' << fmt6(g.alpha_imit) << ',' << fmt6(g.lambda) << ',' << (g.diverged ? "diverged" : "ok") << ','
         << (i == res.selected ? 1 : 0) << ',' << fmt6(r.initial.action) << ',' << fmt6(r.final.state) << ','
         << fmt6(r.final.action) << ',' << fmt6(r.final.imitation) << '\n';
    for (std::size_t e = 0; e < r.epochs.size(); ++e)
      curves << i << ',' << e + 1 << ',' << fmt6(r.epochs[e].state) << ',' << fmt6(r.epochs[e].action) << ','
             << fmt6(r.epochs[e].imitation) << '\n';
  }
  std::ostringstream losses;
  losses << "epoch,state,action,imitation\n";
  for (std::size_t e = 0; e < best.result.epochs.size(); ++e) {
    const auto& l = best.result.epochs[e];
    losses << e + 1 << ',' << fmt6(l.state) << ',' << fmt6(l.action) << ',' << fmt6(l.imitation) << '\n';
  }
  write_file_atomic(out / "grid.csv", grid.str());
  write_file_atomic(out / "grid_losses.csv", curves.str());
  write_file_atomic(out / "losses.csv", losses.str());
  m.files.insert(m.files.end(), {"theta.json", "grid.csv", "grid_losses.csv", "losses.csv"});
  m.seeds["shuffle"] = config.seed;
  m.metrics = {{"selected_alpha_imit", best.alpha_imit},
               {"selected_lambda", best.lambda},
               {"initial_action_loss", best.result.initial.action},
               {"final_action_loss", best.result.final.action},
               {"final_state_loss", best.result.final.state},
               {"train_samples", static_cast<double>(train.size())},
               {"holdout_samples", static_cast<double>(held.size())}};
  if (res.holdout_action_rms >= 0.0) m.metrics["holdout_action_rms_kw"] = res.holdout_action_rms;
  for (const auto& g : res.grid) {
    if (g.diverged) m.warnings.push_back(g.message);
  }
  finish_run(m, config, out, sw);
  res.manifest = m;
  return res;
}

DeployResult cmd_deploy(const ExperimentConfig& config, const std::filesystem::path& checkpoint,
                        const std::filesystem::path& out) {
  config.validate();
  const Stopwatch sw;
  const auto& kind = config.controller;
  const bool history = kind == "history";
  const auto& source = history ? config.history.weather : config.weather;
  const int hours = (history ? config.history.days : config.deploy_days) * 24;

  DeployResult res;
  res.controller = kind;
  res.weather = load_weather_source(config, source);
  // History runs describe normal operation; faults apply to deployments only.
  const FaultSchedule faults = history ? FaultSchedule{} : build_faults(config, res.weather, hours);
  res.scheduled_fault_hours = faults.fault_hours(res.weather.front().time, hours);

  std::unique_ptr<Controller> ctrl;
  IbexController* rl = nullptr;
  MpcController* mpc = nullptr;
  if ((kind == "mpc" || kind == "rl") && checkpoint.empty())
    throw ConfigError(kind + " deployment needs a checkpoint");
  if (kind == "baseline") {
    ctrl = std::make_unique<BaselineController>(config.baseline_setpoint);
  } else if (history) {
    ctrl = std::make_unique<HistoryController>(config.plant.true_params, config.plant.cop, config.bounds, config.seed,
                                               config.history.dither, config.history.block);
  } else if (kind == "mpc") {
    const auto model = read_model_checkpoint(checkpoint);
    auto c = std::make_unique<MpcController>(MpcModel{model.params, model.cop, model.qe}, config.mpc.weights,
                                             config.mpc.tuning, config.bounds, config.mpc.retune_hours);
    mpc = c.get();
    ctrl = std::move(c);
  } else {
    const json head = json::parse(read_file(checkpoint), nullptr, false);
    if (head.is_object() && head.value("kind", std::string{}) == "mpc-model")
      throw ConfigError(checkpoint.string() + " is an MPC model; rl deployment needs a pretrain checkpoint");
    const auto ck = read_checkpoint(checkpoint);
    const PolicyContext ctx{config.plant.cop, config.bounds, config.rl.solver};
    auto c = std::make_unique<IbexController>(ck.theta_state, ck.theta_cost, ctx, config.rl.hyper, config.rl.weights,
                                              IbexOptions{config.rl.learn_state, config.rl.learn_cost, false});
    rl = c.get();
    ctrl = std::move(c);
  }

  auto m = begin_run(config, "deploy", out);
  EpisodeOptions opt;
  opt.hours = hours;
  opt.clock = config.clock();
  if (rl) {
    std::filesystem::create_directories(out / "checkpoints");
    opt.on_day_end = [&](std::chrono::sys_days day) {
      IbexCheckpoint ck;
      ck.theta_state = rl->theta_state();
      ck.theta_cost = rl->theta_cost();
      ck.hyper = config.rl.hyper;
      ck.label = "end of " + format_date(day);
      const std::string name = "checkpoints/theta-" + format_date(day) + ".json";
      write_checkpoint(out / name, ck);
      m.files.push_back(name);
    };
  }
  res.episode = run_episode(*ctrl, config.plant, res.weather, config.schedule, faults, config.seed, opt);

  write_log_csv(out / "log.csv", res.episode.log);
  write_weather_csv(out / "weather.csv", res.weather);
  m.files.insert(m.files.end(), {"log.csv", "weather.csv"});
  if (rl) {
    res.final_state = rl->theta_state();
    res.final_cost = rl->theta_cost();
    IbexCheckpoint ck;
    ck.theta_state = res.final_state;
    ck.theta_cost = res.final_cost;
    ck.hyper = config.rl.hyper;
    ck.label = "final";
    write_checkpoint(out / "theta.json", ck);
    m.files.push_back("theta.json");
    for (const auto& n : rl->notices()) m.warnings.push_back(n);
    m.metrics["final_o_state"] = res.final_cost.o_state;
    m.metrics["final_r_hp"] = res.final_cost.r_hp;
    m.metrics["final_r_bh"] = res.final_cost.r_bh;
  }
  if (mpc) {
    m.warnings.insert(m.warnings.end(), mpc->warnings().begin(), mpc->warnings().end());
    m.metrics["base_comfort_weight"] = mpc->base_comfort_weight();
  }
  double energy = 0.0;
  for (const auto& r : res.episode.log) energy += r.energy_kwh;
  m.seeds["plant"] = config.seed;
  m.seeds["weather"] = source.seed;
  m.metrics["hours"] = hours;
  m.metrics["log_rows"] = static_cast<double>(res.episode.log.size());
  m.metrics["downtime_hours"] = res.episode.downtime_hours;
  m.metrics["scheduled_fault_hours"] = res.scheduled_fault_hours;
  m.metrics["validated_transitions"] = res.episode.validated_transitions;
  m.metrics["rejected_transitions"] = res.episode.rejected_transitions;
  m.metrics["energy_kwh"] = energy;
  finish_run(m, config, out, sw);
  res.manifest = m;
  return res;
}

namespace {

bool valid_run_name(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; });
}

double regressor(const DailyRecord& d, SignatureKind kind) {
  return kind == SignatureKind::kOutdoor ? d.t_out_mean : d.t_out_mean - d.t_in_mean;
}

std::array<double, 2> support_of(const std::vector<DailyRecord>& days, SignatureKind kind) {
  std::array<double, 2> s{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& d : days) {
    s[0] = std::min(s[0], regressor(d, kind));
    s[1] = std::max(s[1], regressor(d, kind));
  }
  return s;
}

std::string interval_text(const std::array<double, 2>& v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "[%.2f, %.2f]", v[0], v[1]);
  return buf;
}

// Common support of every run intersected with the configured interval.
std::array<double, 2> usable_interval(const std::vector<CompareEntry>& entries, SignatureKind kind,
                                      const std::array<double, 2>& configured, std::vector<std::string>& warnings) {
  std::array<double, 2> common{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (const auto& e : entries) {
    const auto& s = kind == SignatureKind::kOutdoor ? e.outdoor.support : e.delta.support;
    common[0] = std::max(common[0], s[0]);
    common[1] = std::min(common[1], s[1]);
  }
  const std::string label = kind == SignatureKind::kOutdoor ? "outdoor temperature" : "indoor-outdoor difference";
  if (common[0] > common[1]) {
    std::string msg = "disjoint " + label + " support across runs:";
    for (const auto& e : entries)
      msg += " " + e.name + " " + interval_text(kind == SignatureKind::kOutdoor ? e.outdoor.support : e.delta.support);
    throw DataError(msg);
  }
  const std::array<double, 2> usable{std::max(common[0], configured[0]), std::min(common[1], configured[1])};
  if (usable[0] > usable[1]) {
    warnings.push_back(label + " interval " + interval_text(configured) + " lies outside the common support " +
                       interval_text(common) + "; no usable interval");
  } else if (usable[0] > configured[0] || usable[1] < configured[1]) {
    warnings.push_back(label + " interval " + interval_text(configured) + " extends beyond the common support; usable interval " +
                       interval_text(usable));
  }
  return usable;
}

json fit_json(const SignatureSummary& s) {
  const auto& f = s.fit;
  json j = {{"kind", to_string(f.kind)},
            {"beta0", f.beta0},
            {"beta1", f.beta1},
            {"cov", {{f.cov[0][0], f.cov[0][1]}, {f.cov[1][0], f.cov[1][1]}}},
            {"r_squared", f.r_squared},
            {"n_days", f.n},
            {"t_in_ref", f.t_in_ref},
            {"support", s.support},
            {"auc_kwh", s.auc},
            {"balance_temperature", s.balance_temperature}};
  return j;
}

json ppd_json(const PpdTable& t) {
  auto one = [](const PpdSummary& s) {
    return json{{"mean", s.mean}, {"std", s.std_dev}, {"max", s.max}, {"min", s.min}, {"hours", s.count}};
  };
  return {{"overall", one(t.overall)}, {"day", one(t.day)}, {"night", one(t.night)}};
}

std::string curve_csv(const std::vector<CompareEntry>& entries, SignatureKind kind, const std::array<double, 2>& iv,
                      double step, const CopCurve& cop) {
  std::ostringstream os;
  os << "x";
  for (const auto& e : entries) os << ',' << e.name << "_load_kwh," << e.name << "_energy_kwh";
  os << '\n';
  const auto n = static_cast<long>(std::floor((iv[1] - iv[0]) / step + 1e-9));
  for (long i = 0; i <= n; ++i) {
    const double x = iv[0] + static_cast<double>(i) * step;
    os << fmt6(x);
    for (const auto& e : entries) {
      const auto& f = kind == SignatureKind::kOutdoor ? e.outdoor.fit : e.delta.fit;
      const double load = f.beta0 + f.beta1 * x;
      os << ',' << fmt6(load) << ',' << fmt6(load / cop(signature_outdoor_temp(f, x)));
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace

CompareReport cmd_compare(const ExperimentConfig& config,
                          const std::vector<std::pair<std::string, std::filesystem::path>>& runs,
                          const std::filesystem::path& out) {
  config.validate();
  const Stopwatch sw;
  if (runs.size() < 2) throw ConfigError("compare needs a baseline and at least one controller run");
  std::set<std::string> names;
  for (const auto& [name, dir] : runs) {
    if (!valid_run_name(name)) throw ConfigError("run name '" + name + "' must use letters, digits, '-' or '_'");
    if (!names.insert(name).second) throw ConfigError("duplicate run name '" + name + "'");
  }
  const auto& a = config.analysis;
  const auto& cop = config.plant.cop;
  const auto clock = config.clock();

  CompareReport rep;
  for (const auto& [name, dir] : runs) {
    if (!std::filesystem::exists(dir / "log.csv")) throw DataError("no log.csv in run directory " + dir.string());
    const auto log = read_log_csv(dir / "log.csv");
    CompareEntry e;
    e.name = name;
    e.days = filter_days(log, clock, a.min_operating_hours);
    if (e.days.size() < 3)
      throw DataError(name + ": only " + std::to_string(e.days.size()) + " days pass the operating-hours filter");
    e.outdoor.fit = fit_signature(e.days, cop, SignatureKind::kOutdoor);
    e.delta.fit = fit_signature(e.days, cop, SignatureKind::kDelta);
    e.outdoor.support = support_of(e.days, SignatureKind::kOutdoor);
    e.delta.support = support_of(e.days, SignatureKind::kDelta);
    e.ppd_return = ppd_stats(log, a.comfort, TempColumn::kReturn, clock, a.day_start, a.day_end);
    e.ppd_local = ppd_stats(log, a.comfort, TempColumn::kLocal, clock, a.day_start, a.day_end);
    rep.entries.push_back(std::move(e));
  }
  rep.usable_outdoor = usable_interval(rep.entries, SignatureKind::kOutdoor, a.outdoor_interval, rep.warnings);
  rep.usable_delta = usable_interval(rep.entries, SignatureKind::kDelta, a.delta_interval, rep.warnings);

  for (std::size_t k = 0; k < rep.entries.size(); ++k) {
    auto& e = rep.entries[k];
    for (auto* s : {&e.outdoor, &e.delta}) {
      const bool outdoor = s == &e.outdoor;
      const auto& iv = outdoor ? a.outdoor_interval : a.delta_interval;
      s->auc = auc_energy(s->fit, cop, iv[0], iv[1], a.auc_step);
      if (s->fit.beta1 != 0.0) {
        s->balance_temperature = balance_temperature(s->fit);
      } else {
        s->balance_temperature = std::numeric_limits<double>::quiet_NaN();
        rep.warnings.push_back(e.name + ": flat " + to_string(s->fit.kind) + " signature has no balance temperature");
      }
      if (k == 0) continue;
      const auto& base = outdoor ? rep.entries[0].outdoor.fit : rep.entries[0].delta.fit;
      MonteCarloOptions mo;
      mo.n = a.mc_samples;
      mo.seed = config.seed + 2 * k + (outdoor ? 0 : 1);
      mo.step = a.auc_step;
      mo.keep_samples = false;
      s->savings = monte_carlo_savings(base, s->fit, cop, iv[0], iv[1], mo);
    }
  }

  auto m = begin_run(config, "compare", out);
  json j;
  json fits = json::object(), auc = json::object(), savings = json::object(), tb = json::object(), ppd = json::object();
  std::ostringstream txt;
  txt << "Signature fits (E_e COP vs regressor)\n";
  for (const auto& e : rep.entries) {
    fits[e.name] = {{"outdoor", fit_json(e.outdoor)}, {"delta", fit_json(e.delta)}};
    for (const auto* s : {&e.outdoor, &e.delta}) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "  %-10s %-7s beta0 %9.3f  beta1 %8.4f  R2 %.3f  days %d\n", e.name.c_str(),
                    to_string(s->fit.kind).c_str(), s->fit.beta0, s->fit.beta1, s->fit.r_squared, s->fit.n);
      txt << buf;
    }
  }
  txt << "\nArea under curve (kWh)\n";
  for (const auto& e : rep.entries) {
    auc[e.name] = {{"outdoor", e.outdoor.auc}, {"delta", e.delta.auc}};
    char buf[256];
    std::snprintf(buf, sizeof buf, "  %-10s outdoor %s %9.2f   delta %s %9.2f\n", e.name.c_str(),
                  interval_text(a.outdoor_interval).c_str(), e.outdoor.auc, interval_text(a.delta_interval).c_str(),
                  e.delta.auc);
    txt << buf;
  }
  txt << "\nSavings vs " << rep.entries[0].name << " (%, Monte-Carlo mean [2.5%, 97.5%])\n";
  for (std::size_t k = 1; k < rep.entries.size(); ++k) {
    const auto& e = rep.entries[k];
    auto one = [](const SavingsDistribution& s) {
      return json{{"mean", s.mean}, {"lo", s.lo}, {"hi", s.hi}, {"plug_in", s.plug_in}, {"std_error", s.std_error}};
    };
    savings[e.name] = {{"outdoor", one(e.outdoor.savings)}, {"delta", one(e.delta.savings)}};
    char buf[256];
    std::snprintf(buf, sizeof buf, "  %-10s outdoor %6.2f [%6.2f, %6.2f]   delta %6.2f [%6.2f, %6.2f]\n", e.name.c_str(),
                  e.outdoor.savings.mean, e.outdoor.savings.lo, e.outdoor.savings.hi, e.delta.savings.mean,
                  e.delta.savings.lo, e.delta.savings.hi);
    txt << buf;
  }
  txt << "\nBalance temperatures (degC)\n";
  for (const auto& e : rep.entries) {
    tb[e.name] = {{"outdoor", e.outdoor.balance_temperature}, {"delta", e.delta.balance_temperature}};
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %-10s outdoor %7.2f   delta %7.2f\n", e.name.c_str(), e.outdoor.balance_temperature,
                  e.delta.balance_temperature);
    txt << buf;
  }
  txt << "\nComfort (PPD %, mean / std / max)\n";
  for (const auto& e : rep.entries) {
    ppd[e.name] = {{"return", ppd_json(e.ppd_return)}, {"thermostat", ppd_json(e.ppd_local)}};
    for (const auto& [col, t] : {std::pair{"return", &e.ppd_return}, std::pair{"thermostat", &e.ppd_local}}) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "  %-10s %-10s all %5.2f/%5.2f/%5.2f  day %5.2f  night %5.2f\n", e.name.c_str(), col,
                    t->overall.mean, t->overall.std_dev, t->overall.max, t->day.mean, t->night.mean);
      txt << buf;
    }
  }
  if (!rep.warnings.empty()) {
    txt << "\nWarnings\n";
    for (const auto& w : rep.warnings) txt << "  " << w << '\n';
  }
  j["fits"] = fits;
  j["auc"] = auc;
  j["savings"] = savings;
  j["balance_temperature"] = tb;
  j["ppd"] = ppd;
  j["intervals"] = {{"outdoor", a.outdoor_interval},
                    {"delta", a.delta_interval},
                    {"usable_outdoor", rep.usable_outdoor},
                    {"usable_delta", rep.usable_delta}};
  j["warnings"] = rep.warnings;
  write_json(out / "report.json", j);
  write_file_atomic(out / "report.txt", txt.str());

  std::ostringstream days;
  days << "run,date,operating_hours,present_hours,e_e_kwh,t_out_mean_c,t_in_mean_c,load_kwh\n";
  for (const auto& e : rep.entries) {
    for (const auto& d : e.days)
      days << e.name << ',' << format_date(d.date) << ',' << d.operating_hours << ',' << d.present_hours << ','
           << fmt6(d.e_e) << ',' << fmt6(d.t_out_mean) << ',' << fmt6(d.t_in_mean) << ',' << fmt6(d.e_e * cop(d.t_out_mean))
           << '\n';
  }
  write_file_atomic(out / "days.csv", days.str());
  write_file_atomic(out / "curves_outdoor.csv", curve_csv(rep.entries, SignatureKind::kOutdoor, a.outdoor_interval, a.curve_step, cop));
  write_file_atomic(out / "curves_delta.csv", curve_csv(rep.entries, SignatureKind::kDelta, a.delta_interval, a.curve_step, cop));
  m.files.insert(m.files.end(), {"report.json", "report.txt", "days.csv", "curves_outdoor.csv", "curves_delta.csv"});
  m.seeds["monte_carlo"] = config.seed;
  m.warnings = rep.warnings;
  for (std::size_t k = 1; k < rep.entries.size(); ++k) {
    m.metrics[rep.entries[k].name + "_savings_outdoor_pct"] = rep.entries[k].outdoor.savings.mean;
    m.metrics[rep.entries[k].name + "_savings_delta_pct"] = rep.entries[k].delta.savings.mean;
  }
  finish_run(m, config, out, sw);
  rep.manifest = m;
  return rep;
}

}  // namespace hvac
