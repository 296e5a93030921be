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

#include "hvac/plant.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>
#include <sstream>

#include "hvac/csv.hpp"
#include "hvac/errors.hpp"

namespace hvac {

void PlantConfig::validate() const {
  true_params.validate();
  if (!(deadband > 0.0)) throw ConfigError("thermostat deadband must be positive");
  if (!(stage2_gap > deadband)) throw ConfigError("stage-2 gap must exceed the deadband");
  if (!(hp_capacity > 0.0 && bh_capacity > 0.0)) throw ConfigError("heating capacities must be positive");
  if (substep_seconds <= 0 || 3600 % substep_seconds != 0) throw ConfigError("substep must divide 3600 seconds");
  if (!(return_sigma >= 0.0 && local_sigma >= 0.0)) throw ConfigError("sensor noise must be non-negative");
  if (!(local_resolution > 0.0)) throw ConfigError("thermostat display resolution must be positive");
}

PhysicalParams perturb_params(const PhysicalParams& nominal, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> f(1.0 - spread, 1.0 + spread);
  PhysicalParams p = nominal;
  p.capacitance *= f(rng);
  p.r_mass *= f(rng);
  p.r_out *= f(rng);
  return p;
}

ThermostatOutput thermostat_step(const PlantConfig& cfg, double setpoint, double local, Stage prev) {
  bool on = prev != Stage::kOff;
  if (local < setpoint - cfg.deadband) on = true;
  else if (local > setpoint + cfg.deadband) on = false;
  ThermostatOutput out;
  if (!on) return out;
  out.p_hp = cfg.hp_capacity;
  out.stage = Stage::kStage1;
  if (setpoint - local >= cfg.stage2_gap) {
    out.p_bh = cfg.bh_capacity;
    out.stage = Stage::kStage2;
  }
  return out;
}

namespace {

double derivative(const PlantConfig& cfg, double x, const Power& p, const WeatherPoint& w, double gain) {
  const auto& th = cfg.true_params;
  const double q = (th.t_mass - x) / th.r_mass + (w.t_out - x) / th.r_out + cfg.cop(w.t_out) * p[0] +
                   th.eta_backup * p[1] + th.a_eff * w.i_sol + gain;
  return q / th.capacitance;
}

double quantize(double v, double res) { return std::floor(v / res + 0.5) * res; }

double round6(double v) { return std::round(v * 1e6) / 1e6; }

}  // namespace

double plant_step(const PlantConfig& cfg, const Power& powers, const WeatherPoint& w, double x, double extra_gain) {
  const int n = 3600 / cfg.substep_seconds;
  const double h = cfg.substep_seconds / 3600.0;
  for (int i = 0; i < n; ++i) x += h * derivative(cfg, x, powers, w, extra_gain);
  return x;
}

void FaultSchedule::validate() const {
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (!(windows[i].start < windows[i].end)) throw ConfigError("fault window must have start < end");
    for (std::size_t j = 0; j < i; ++j) {
      if (windows[j].kind != windows[i].kind) continue;
      if (windows[i].start < windows[j].end && windows[j].start < windows[i].end)
        throw ConfigError("fault windows of the same kind overlap");
    }
  }
}

bool FaultSchedule::active(FaultKind kind, TimePoint t) const {
  return std::any_of(windows.begin(), windows.end(),
                     [&](const FaultWindow& w) { return w.kind == kind && w.start <= t && t < w.end; });
}

int FaultSchedule::fault_hours(TimePoint from, int hours) const {
  int n = 0;
  for (int k = 0; k < hours; ++k) {
    const TimePoint t = from + std::chrono::hours{k};
    if (active(FaultKind::kCommandDrop, t) || active(FaultKind::kSensorGap, t)) ++n;
  }
  return n;
}

FaultSchedule fault_preset(const std::string& name, TimePoint start, int hours) {
  FaultSchedule fs;
  if (name == "none") return fs;
  if (name != "interruptions") throw ConfigError("unknown fault preset '" + name + "'");
  // Five outages spread over the span, alternating kinds, about 5% of the hours each.
  const int len = std::max(1, hours / 20);
  for (int i = 0; i < 5; ++i) {
    const int at = (2 * i + 1) * hours / 10 - len / 2;
    const auto kind = i % 2 == 0 ? FaultKind::kCommandDrop : FaultKind::kSensorGap;
    fs.windows.push_back({start + std::chrono::hours{std::max(at, 1)}, start + std::chrono::hours{std::max(at, 1) + len}, kind});
  }
  return fs;
}

void write_log_csv(const std::filesystem::path& path, const InteractionLog& log) {
  std::ostringstream os;
  os << "timestamp,setpoint_c,readback_ok,u_hp_kw,u_bh_kw,p_hp_kw,p_bh_kw,t_true_c,t_return_c,t_local_c,t_out_c,"
        "i_sol_kw_m2,energy_kwh\n";
  for (const auto& r : log) {
    os << format_rfc3339(r.time) << ',' << fmt6(r.setpoint) << ',' << (r.readback_ok ? 1 : 0) << ',' << fmt6(r.u_hp)
       << ',' << fmt6(r.u_bh) << ',' << fmt6(r.p_hp) << ',' << fmt6(r.p_bh) << ',' << fmt6(r.t_true) << ','
       << fmt6(r.t_return) << ',' << fmt6(r.t_local) << ',' << fmt6(r.t_out) << ',' << fmt6(r.i_sol) << ','
       << fmt6(r.energy_kwh) << '\n';
  }
  write_file_atomic(path, os.str());
}

InteractionLog read_log_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t c[13] = {t.column("timestamp"), t.column("setpoint_c"), t.column("readback_ok"),
                             t.column("u_hp_kw"),   t.column("u_bh_kw"),    t.column("p_hp_kw"),
                             t.column("p_bh_kw"),   t.column("t_true_c"),   t.column("t_return_c"),
                             t.column("t_local_c"), t.column("t_out_c"),    t.column("i_sol_kw_m2"),
                             t.column("energy_kwh")};
  InteractionLog log;
  log.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    try {
      InteractionRecord r;
      r.time = parse_rfc3339(row[c[0]]);
      r.setpoint = parse_double(row[c[1]]);
      r.readback_ok = row[c[2]] == "1" || row[c[2]] == "true";
      r.u_hp = parse_double(row[c[3]]);
      r.u_bh = parse_double(row[c[4]]);
      r.p_hp = parse_double(row[c[5]]);
      r.p_bh = parse_double(row[c[6]]);
      r.t_true = parse_double(row[c[7]]);
      r.t_return = parse_double(row[c[8]]);
      r.t_local = parse_double(row[c[9]]);
      r.t_out = parse_double(row[c[10]]);
      r.i_sol = parse_double(row[c[11]]);
      r.energy_kwh = parse_double(row[c[12]]);
      if (!log.empty() && !(log.back().time < r.time)) throw DataError("timestamps not increasing");
      log.push_back(r);
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(i + 2) + ": " + e.what());
    }
  }
  return log;
}

Observation make_observation(long step, const std::vector<WeatherPoint>& weather, std::size_t index, int horizon,
                             const SiteClock& clock, const SetpointSchedule& schedule, double t_return) {
  if (index + static_cast<std::size_t>(horizon) > weather.size())
    throw DataError("weather trace ends before the forecast horizon at " + format_rfc3339(weather.back().time));
  Observation obs;
  obs.step = step;
  obs.time = weather[index].time;
  obs.local_hour = clock.local_hour(obs.time);
  obs.t_return = t_return;
  obs.forecast.reserve(static_cast<std::size_t>(horizon));
  for (int l = 0; l < horizon; ++l) {
    const auto& w = weather[index + static_cast<std::size_t>(l)];
    ForecastStep f;
    f.t_out = w.t_out;
    f.i_sol = w.i_sol;
    f.wind = w.wind;
    f.local_hour = clock.local_hour(w.time);
    f.target = schedule.target_at(clock.local_hour(w.time + std::chrono::hours{1}));
    obs.forecast.push_back(f);
  }
  return obs;
}

EpisodeResult run_episode(Controller& controller, const PlantConfig& cfg, const std::vector<WeatherPoint>& weather,
                          const SetpointSchedule& schedule, const FaultSchedule& faults, std::uint64_t seed,
                          const EpisodeOptions& opt) {
  cfg.validate();
  schedule.validate();
  faults.validate();
  if (opt.hours < 1) throw ConfigError("episode must span at least one hour");
  const int horizon = controller.horizon();
  const std::size_t needed = opt.start_index + static_cast<std::size_t>(opt.hours + horizon);
  if (weather.size() < needed) {
    const auto missing = needed - weather.size();
    throw DataError("weather trace too short: episode needs " + std::to_string(needed) + " hours (including the " +
                    std::to_string(horizon) + " h forecast), trace has " + std::to_string(weather.size()) +
                    "; missing the last " + std::to_string(missing) + " hours");
  }
  validate_weather(weather);

  std::seed_seq s_return{seed, std::uint64_t{1}};
  std::seed_seq s_local{seed, std::uint64_t{2}};
  std::mt19937_64 rng_return(s_return);
  std::mt19937_64 rng_local(s_local);
  std::normal_distribution<double> nd;

  EpisodeResult res;
  double x = cfg.initial_temp;
  Stage stage = Stage::kOff;
  const TimePoint t0 = weather[opt.start_index].time;
  double active_setpoint = quantize_setpoint(schedule.target_at(opt.clock.local_hour(t0)));
  Power active_power{0.0, 0.0};
  std::optional<Transition> pending;
  std::vector<Transition> day_buffer;
  const int substeps = 3600 / cfg.substep_seconds;
  const double h = cfg.substep_seconds / 3600.0;

  for (int k = 0; k < opt.hours; ++k) {
    const std::size_t idx = opt.start_index + static_cast<std::size_t>(k);
    const WeatherPoint& w = weather[idx];
    const int hour = opt.clock.local_hour(w.time);
    const bool gap = faults.active(FaultKind::kSensorGap, w.time);
    const bool drop = faults.active(FaultKind::kCommandDrop, w.time);
    // Draw every hour so noise realisations do not depend on the fault schedule.
    const double measured = x + cfg.return_offset + cfg.return_sigma * nd(rng_return);

    if (pending) {
      if (!gap && pending->readback_ok) {
        pending->x_next = measured;
        day_buffer.push_back(*pending);
        ++res.validated_transitions;
      } else {
        ++res.rejected_transitions;
      }
      pending.reset();
    }
    if (hour == 0 && k > 0) {
      controller.on_midnight(day_buffer);
      day_buffer.clear();
      if (opt.on_day_end) opt.on_day_end(opt.clock.local_day(w.time) - std::chrono::days{1});
    }

    InteractionRecord rec;
    rec.time = w.time;
    rec.t_true = x;
    rec.t_return = measured;
    rec.t_out = w.t_out;
    rec.i_sol = w.i_sol;
    std::optional<Observation> obs;
    if (!gap) {
      obs = make_observation(k, weather, idx, horizon, opt.clock, schedule, measured);
      const ControllerDecision dec = controller.decide(*obs);
      if (dec.u_star) {
        rec.u_hp = (*dec.u_star)[0];
        rec.u_bh = (*dec.u_star)[1];
        res.planned_energy_kwh += rec.u_hp + rec.u_bh;
      }
      if (!drop) {
        active_setpoint = dec.setpoint_command;
        if (controller.direct_power() && dec.u_star) {
          active_power = {std::clamp((*dec.u_star)[0], 0.0, cfg.hp_capacity),
                          std::clamp((*dec.u_star)[1], 0.0, cfg.bh_capacity)};
        }
        rec.readback_ok = true;
      }
    }
    rec.setpoint = active_setpoint;
    if (!rec.readback_ok) ++res.downtime_hours;

    const double gain = hour >= cfg.gain_start && hour < cfg.gain_end ? cfg.internal_gain : 0.0;
    double sum_hp = 0.0, sum_bh = 0.0;
    for (int i = 0; i < substeps; ++i) {
      const double local = quantize(x + cfg.local_offset + cfg.local_sigma * nd(rng_local), cfg.local_resolution);
      if (i == 0) rec.t_local = local;
      Power p = active_power;
      if (!controller.direct_power()) {
        const auto th = thermostat_step(cfg, active_setpoint, local, stage);
        stage = th.stage;
        p = {th.p_hp, th.p_bh};
      }
      sum_hp += p[0];
      sum_bh += p[1];
      x += h * derivative(cfg, x, p, w, gain);
    }
    // Logged at the CSV resolution so the energy identity survives a round trip.
    rec.p_hp = round6(sum_hp / substeps);
    rec.p_bh = round6(sum_bh / substeps);
    rec.energy_kwh = rec.p_hp + rec.p_bh;  // one-hour step

    if (obs) {
      Transition tr;
      tr.obs = std::move(*obs);
      tr.applied = {rec.p_hp, rec.p_bh};
      tr.setpoint = active_setpoint;
      tr.readback_ok = rec.readback_ok;
      pending = std::move(tr);
      res.log.push_back(rec);
    }
  }
  return res;
}

std::vector<IdentSample> log_to_samples(const InteractionLog& log, const std::vector<WeatherPoint>& weather,
                                        const SiteClock& clock, const CopCurve& cop, double eta) {
  std::unordered_map<long long, std::size_t> by_time;
  for (std::size_t i = 0; i < weather.size(); ++i) by_time.emplace(weather[i].time.time_since_epoch().count(), i);
  std::vector<IdentSample> out;
  for (std::size_t k = 0; k + 1 < log.size(); ++k) {
    const auto& r = log[k];
    const auto& n = log[k + 1];
    if (!r.readback_ok || n.time - r.time != std::chrono::hours{1}) continue;
    const auto it = by_time.find(r.time.time_since_epoch().count());
    if (it == by_time.end()) throw DataError("no weather row for log time " + format_rfc3339(r.time));
    IdentSample s;
    s.t = r.t_return;
    s.t_next = n.t_return;
    s.t_out = r.t_out;
    s.i_sol = r.i_sol;
    s.wind = weather[it->second].wind;
    s.local_hour = clock.local_hour(r.time);
    s.q_c = cop(r.t_out) * r.p_hp + eta * r.p_bh;
    s.hour_index = std::chrono::duration_cast<std::chrono::hours>(r.time.time_since_epoch()).count();
    out.push_back(s);
  }
  return out;
}

}  // namespace hvac
